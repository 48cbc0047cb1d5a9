//! Converging linear-programming relaxations for translation-invariant
//! marginal and energy problems.
//!
//! The level-`n` *strip* relaxation asks for a probability distribution
//! `P` on the configurations of `rect(n, t)` satisfying local translation
//! invariance (LTI): the marginal on the left `(n-1) x t` sub-rectangle
//! equals the marginal on the right one, and the marginal on the bottom
//! `n x (t-1)` sub-rectangle equals the marginal on the top one.  Pinning a
//! [`MarginalSpec`] means additionally fixing the marginal of `P` on each
//! spec region (embedded at its minimum corner — by LTI the placement does
//! not matter).  Any true translation-invariant measure restricts to such a
//! `P`, so infeasibility at any level refutes the spec exactly; feasibility
//! is necessary but not sufficient, with the levels converging as `n` grows.
//!
//! The same machinery bounds energy minimisation: minimising a local
//! [`Hamiltonian`] over the level-`n` relaxation yields a certified lower
//! bound on the true translation-invariant ground value, while exact
//! evaluation of symmetrised periodic patterns yields upper bounds and a
//! witness; when the two meet the value is exact.
//!
//! Strips are assumed wider than tall.  Inputs whose regions are taller than
//! wide are transposed (a quarter-turn rotation of every region) before the
//! program is built; the verdict is invariant under that rotation.

use std::collections::BTreeMap;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exactlp::{
    solve, solve_feasibility, Certificate, CertificateKind, LinearProgram, RowKind,
};
use crate::lattice::{
    config_count, decode_config, encode_config, MarginalSpec, Pattern, Region,
};
use crate::rat::{parse_rat, Rat};
use crate::Result;

/// Default cap on enumerated configuration counts (LP variables, pattern
/// searches).
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// A local energy function: for each term region, an exact table over its
/// configurations (keyed like [`Distribution`] configurations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "HamiltonianDto", try_from = "HamiltonianDto")]
pub struct Hamiltonian {
    /// Local dimension.
    pub d: usize,
    /// `(region, table)` terms; each table has `d^|region|` entries in
    /// configuration-key order.
    pub terms: Vec<(Region, Vec<Rat>)>,
}

impl Hamiltonian {
    /// Build and validate: each table must cover its region's configurations.
    pub fn new(d: usize, terms: Vec<(Region, Vec<Rat>)>) -> Result<Hamiltonian> {
        if d < 2 {
            return Err(Error::structural("local dimension must be at least 2"));
        }
        for (region, table) in &terms {
            let want = config_count(d, region.len())?;
            if table.len() as u64 != want {
                return Err(Error::structural(format!(
                    "term table has {} entries, region needs {want}",
                    table.len()
                )));
            }
        }
        Ok(Hamiltonian { d, terms })
    }

    /// Convenience: a pair term from a `d x d` role table `F(a, b)` with `a`
    /// at `(0, 0)` and `b` at the partner site.
    pub fn pair_term(d: usize, region: Region, table: &[Vec<Rat>]) -> Result<(Region, Vec<Rat>)> {
        if region.len() != 2 || !region.contains((0, 0)) {
            return Err(Error::structural(
                "pair term requires a two-site region containing (0, 0)",
            ));
        }
        if table.len() != d || table.iter().any(|r| r.len() != d) {
            return Err(Error::structural(format!("pair table must be {d} x {d}")));
        }
        let anchor = region.index_of((0, 0)).unwrap();
        let mut values = vec![Rat::zero(); d * d];
        for (a, row) in table.iter().enumerate() {
            for (b, f) in row.iter().enumerate() {
                let mut digits = [0u8; 2];
                digits[anchor] = a as u8;
                digits[1 - anchor] = b as u8;
                values[encode_config(&digits, d) as usize] = f.clone();
            }
        }
        Ok((region, values))
    }

    /// Exact symmetrised energy of a periodic pattern: for each term, the
    /// average of its table over all translates of the pattern's period.
    pub fn pattern_energy(&self, pattern: &Pattern) -> Result<Rat> {
        if pattern.d() != self.d {
            return Err(Error::structural(format!(
                "pattern dimension {} does not match Hamiltonian dimension {}",
                pattern.d(),
                self.d
            )));
        }
        let m = pattern.width() as i64;
        let n = pattern.height() as i64;
        let mn = Rat::from_integer((m * n).into());
        let mut total = Rat::zero();
        for (region, table) in &self.terms {
            for (cfg, count) in term_counts(region, pattern).into_iter().enumerate() {
                if count != 0 && !table[cfg].is_zero() {
                    total += &table[cfg] * Rat::from_integer(count.into());
                }
            }
        }
        Ok(total / mn)
    }
}

/// Occurrence counts of each configuration of `region` over all translates
/// of the pattern's period.
fn term_counts(region: &Region, pattern: &Pattern) -> Vec<i64> {
    let m = pattern.width() as i64;
    let n = pattern.height() as i64;
    let mut counts = vec![0i64; (pattern.d() as u64).pow(region.len() as u32) as usize];
    let mut digits = vec![0u8; region.len()];
    for sy in 0..n {
        for sx in 0..m {
            for (slot, &(x, y)) in digits.iter_mut().zip(region.sites()) {
                *slot = pattern.value_at(x + sx, y + sy);
            }
            counts[encode_config(&digits, pattern.d()) as usize] += 1;
        }
    }
    counts
}

/// A built LTI relaxation: the rectangle dimensions, the embedded pinned
/// spec, and the derived linear program whose variables are the `d^(n*t)`
/// rectangle configuration probabilities.
#[derive(Debug, Clone)]
pub struct LTIProgram {
    /// Local dimension.
    pub d: usize,
    /// Rectangle width (the level).
    pub n: usize,
    /// Rectangle height.
    pub t: usize,
    /// The spec as embedded in the rectangle (translated to minimum corners,
    /// and rotated a quarter turn when the input was taller than wide).
    pub pinned: MarginalSpec,
    /// Whether the input was transposed before building.
    pub transposed: bool,
    /// The derived program (feasibility form; zero objective).
    pub lp: LinearProgram,
}

/// Certified lower/upper bounds for a translation-invariant energy problem.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBounds {
    /// Level-`n` relaxation value: a certified lower bound.
    pub lower: Rat,
    /// Best symmetrised periodic energy found: an attained upper bound.
    pub upper: Rat,
    /// Pattern attaining `upper`.
    pub witness_pattern: Option<Pattern>,
    /// True when the periodic search stopped on its budget before covering
    /// every period.
    pub partial: bool,
}

/// Outcome of the periodic upper-bound search.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSearch {
    /// Minimum symmetrised energy over the periods examined.
    pub value: Rat,
    /// First pattern (in enumeration order) attaining `value`.
    pub witness: Pattern,
    /// True when the budget stopped the enumeration early.
    pub partial: bool,
}

// ---------------------------------------------------------------------------
// Relaxation construction
// ---------------------------------------------------------------------------

fn region_extent(region: &Region) -> (i64, i64) {
    let (x0, x1, y0, y1) = region.bounding_box();
    (x1 - x0 + 1, y1 - y0 + 1)
}

fn spec_extent<'a>(regions: impl Iterator<Item = &'a Region>) -> (i64, i64) {
    let mut w = 0;
    let mut h = 0;
    for r in regions {
        let (rw, rh) = region_extent(r);
        w = w.max(rw);
        h = h.max(rh);
    }
    (w, h)
}

fn rotate_spec(spec: &MarginalSpec) -> MarginalSpec {
    let entries = spec
        .entries
        .iter()
        .map(|(_, dist)| {
            let rotated = dist
                .map_sites(|(x, y)| (-y, x))
                .expect("rotation is injective");
            (rotated.region().clone(), rotated)
        })
        .collect();
    MarginalSpec::new(spec.d, entries).expect("rotation preserves validity")
}

fn rotate_hamiltonian(h: &Hamiltonian) -> Hamiltonian {
    let terms = h
        .terms
        .iter()
        .map(|(region, table)| {
            let images: Vec<(i64, i64)> = region.sites().iter().map(|&(x, y)| (-y, x)).collect();
            let rotated = Region::new(images.iter().copied()).expect("rotation is injective");
            let new_pos: Vec<usize> = images
                .iter()
                .map(|&s| rotated.index_of(s).unwrap())
                .collect();
            let mut new_table = vec![Rat::zero(); table.len()];
            for (key, value) in table.iter().enumerate() {
                let digits = decode_config(key as u64, h.d, region.len());
                let mut moved = vec![0u8; digits.len()];
                for (i, &v) in digits.iter().enumerate() {
                    moved[new_pos[i]] = v;
                }
                new_table[encode_config(&moved, h.d) as usize] = value.clone();
            }
            (rotated, new_table)
        })
        .collect();
    Hamiltonian::new(h.d, terms).expect("rotation preserves validity")
}

/// Positions (indices into the full rectangle's site order) of `region`'s
/// sites when translated by `(dx, dy)` into `rect(n, t)`.
fn embedded_positions(region: &Region, dx: i64, dy: i64, n: usize, t: usize) -> Result<Vec<usize>> {
    region
        .sites()
        .iter()
        .map(|&(x, y)| {
            let (ex, ey) = (x + dx, y + dy);
            if ex < 0 || ey < 0 || ex >= n as i64 || ey >= t as i64 {
                return Err(Error::domain(format!(
                    "region does not fit in the {n} x {t} rectangle"
                )));
            }
            Ok(ey as usize * n + ex as usize)
        })
        .collect()
}

/// Shared core: the LTI feasibility program over `rect(n, t)` with the given
/// spec pinned (spec may be empty for pure energy use).
fn build_lti_lp(
    d: usize,
    n: usize,
    t: usize,
    pinned: &MarginalSpec,
    budget: u64,
) -> Result<LinearProgram> {
    let nvars_u64 = config_count(d, n * t)?;
    if nvars_u64 > budget {
        return Err(Error::resource(format!(
            "level requires {nvars_u64} variables (d^(n*t) with d={d}, n={n}, t={t}), over the budget of {budget}"
        )));
    }
    let nvars = nvars_u64 as usize;
    let mut lp = LinearProgram::new(nvars);
    let sites = n * t;

    // Total probability one.
    lp.add_row(
        RowKind::Equality,
        (0..nvars).map(|k| (k, Rat::one())).collect(),
        Rat::one(),
    );

    // The two LTI equalities, as one equality per sub-rectangle
    // configuration: (marginal at offset zero) - (marginal at offset one) = 0.
    let mut add_shift_family = |sub_w: usize, sub_h: usize, dx: i64, dy: i64| -> Result<()> {
        let sub = Region::rect(sub_w as i64, sub_h as i64)?;
        let base = embedded_positions(&sub, 0, 0, n, t)?;
        let shifted = embedded_positions(&sub, dx, dy, n, t)?;
        let nrows = config_count(d, sub.len())? as usize;
        let mut rows: Vec<BTreeMap<usize, Rat>> = vec![BTreeMap::new(); nrows];
        let mut digits = vec![0u8; sites];
        for k in 0..nvars {
            decode_into(k as u64, d, &mut digits);
            let base_key = key_at(&digits, &base, d) as usize;
            let shift_key = key_at(&digits, &shifted, d) as usize;
            if base_key == shift_key {
                continue;
            }
            *rows[base_key].entry(k).or_insert_with(Rat::zero) += Rat::one();
            *rows[shift_key].entry(k).or_insert_with(Rat::zero) -= Rat::one();
        }
        for row in rows {
            let entries: Vec<(usize, Rat)> =
                row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            if !entries.is_empty() {
                lp.add_row(RowKind::Equality, entries, Rat::zero());
            }
        }
        Ok(())
    };
    if n >= 2 {
        add_shift_family(n - 1, t, 1, 0)?;
    }
    if t >= 2 {
        add_shift_family(n, t - 1, 0, 1)?;
    }

    // Pinning: the rectangle marginal on each embedded region equals its
    // table, including the zero entries.
    for (region, dist) in &pinned.entries {
        let positions = embedded_positions(region, 0, 0, n, t)?;
        let nrows = config_count(d, region.len())? as usize;
        let mut rows: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); nrows];
        let mut digits = vec![0u8; sites];
        for k in 0..nvars {
            decode_into(k as u64, d, &mut digits);
            rows[key_at(&digits, &positions, d) as usize].push((k, Rat::one()));
        }
        for (cfg, entries) in rows.into_iter().enumerate() {
            lp.add_row(RowKind::Equality, entries, dist.prob(cfg as u64));
        }
    }
    Ok(lp)
}

/// The unpinned LTI feasibility program over `rect(n, t)`: nonnegativity,
/// total probability one, and the two shift equalities.
pub fn lti_strip_lp(d: usize, n: usize, t: usize, budget: u64) -> Result<LinearProgram> {
    let empty = MarginalSpec::new(d, Vec::new())?;
    build_lti_lp(d, n, t, &empty, budget)
}

pub(crate) fn decode_into(key: u64, d: usize, digits: &mut [u8]) {
    let mut k = key;
    for slot in digits.iter_mut().rev() {
        *slot = (k % d as u64) as u8;
        k /= d as u64;
    }
}

pub(crate) fn key_at(digits: &[u8], positions: &[usize], d: usize) -> u64 {
    positions
        .iter()
        .fold(0u64, |acc, &p| acc * d as u64 + digits[p] as u64)
}

/// Embed every spec region at its minimum corner, transposing first when the
/// spec is taller than wide, and build the level-`n` strip program.
pub fn strip_program_with_budget(
    spec: &MarginalSpec,
    n: usize,
    budget: u64,
) -> Result<LTIProgram> {
    if spec.entries.is_empty() {
        return Err(Error::structural("marginal spec has no entries"));
    }
    let (w, h) = spec_extent(spec.entries.iter().map(|(r, _)| r));
    let (working, transposed) = if h > w {
        (rotate_spec(spec), true)
    } else {
        (spec.clone(), false)
    };
    let (w, h) = spec_extent(working.entries.iter().map(|(r, _)| r));
    if (n as i64) < w {
        return Err(Error::domain(format!(
            "level {n} is below the spec's maximum region width {w}"
        )));
    }
    let t = h as usize;
    let pinned = embed_spec(&working)?;
    let lp = build_lti_lp(working.d, n, t, &pinned, budget)?;
    Ok(LTIProgram {
        d: working.d,
        n,
        t,
        pinned,
        transposed,
        lp,
    })
}

fn embed_spec(spec: &MarginalSpec) -> Result<MarginalSpec> {
    let entries = spec
        .entries
        .iter()
        .map(|(region, dist)| {
            let (x0, _, y0, _) = region.bounding_box();
            let moved = dist.translate(-x0, -y0);
            (moved.region().clone(), moved)
        })
        .collect();
    MarginalSpec::new(spec.d, entries)
}

/// Level-`n` strip feasibility with the default budget: feasible with an
/// explicit LTI distribution, or infeasible with verifiable refuting
/// multipliers.  Infeasibility at any level refutes the spec.
pub fn strip_feasible(spec: &MarginalSpec, n: usize) -> Result<Certificate> {
    strip_feasible_with_budget(spec, n, DEFAULT_BUDGET)
}

/// As [`strip_feasible`] with an explicit enumeration budget.
pub fn strip_feasible_with_budget(
    spec: &MarginalSpec,
    n: usize,
    budget: u64,
) -> Result<Certificate> {
    let program = strip_program_with_budget(spec, n, budget)?;
    solve_feasibility(&program.lp)
}

/// The level-`n` square program: the same LTI form over `rect(n, n)`, with
/// no transposition (the square is symmetric).
pub fn square_program_with_budget(
    spec: &MarginalSpec,
    n: usize,
    budget: u64,
) -> Result<LTIProgram> {
    if spec.entries.is_empty() {
        return Err(Error::structural("marginal spec has no entries"));
    }
    let (w, h) = spec_extent(spec.entries.iter().map(|(r, _)| r));
    if (n as i64) < w || (n as i64) < h {
        return Err(Error::domain(format!(
            "level {n} square cannot contain a {w} x {h} region"
        )));
    }
    let pinned = embed_spec(spec)?;
    let lp = build_lti_lp(spec.d, n, n, &pinned, budget)?;
    Ok(LTIProgram {
        d: spec.d,
        n,
        t: n,
        pinned,
        transposed: false,
        lp,
    })
}

/// Square-relaxation feasibility at level `n` (default budget).
pub fn square_feasible(spec: &MarginalSpec, n: usize) -> Result<Certificate> {
    square_feasible_with_budget(spec, n, DEFAULT_BUDGET)
}

/// As [`square_feasible`] with an explicit enumeration budget.
pub fn square_feasible_with_budget(
    spec: &MarginalSpec,
    n: usize,
    budget: u64,
) -> Result<Certificate> {
    let program = square_program_with_budget(spec, n, budget)?;
    solve_feasibility(&program.lp)
}

// ---------------------------------------------------------------------------
// Energy bounds
// ---------------------------------------------------------------------------

/// Certified level-`n` lower bound on the translation-invariant energy:
/// minimise the Hamiltonian over the strip relaxation (default budget).
pub fn energy_lower_bound(h: &Hamiltonian, n: usize) -> Result<Rat> {
    energy_lower_bound_with_budget(h, n, DEFAULT_BUDGET)
}

/// As [`energy_lower_bound`] with an explicit enumeration budget.
pub fn energy_lower_bound_with_budget(h: &Hamiltonian, n: usize, budget: u64) -> Result<Rat> {
    if h.terms.is_empty() {
        return Err(Error::structural("Hamiltonian has no terms"));
    }
    let (w, ht) = spec_extent(h.terms.iter().map(|(r, _)| r));
    let working = if ht > w { rotate_hamiltonian(h) } else { h.clone() };
    let (w, ht) = spec_extent(working.terms.iter().map(|(r, _)| r));
    if (n as i64) < w {
        return Err(Error::domain(format!(
            "level {n} is below the Hamiltonian's maximum term width {w}"
        )));
    }
    let t = ht as usize;
    let empty = MarginalSpec::new(working.d, Vec::new())?;
    let mut lp = build_lti_lp(working.d, n, t, &empty, budget)?;

    // Objective: maximise the negated energy, so the optimum is -E^n.
    let sites = n * t;
    let mut digits = vec![0u8; sites];
    for (region, table) in &working.terms {
        let (x0, _, y0, _) = region.bounding_box();
        let positions = embedded_positions(region, -x0, -y0, n, t)?;
        for k in 0..lp.num_vars() {
            decode_into(k as u64, working.d, &mut digits);
            let cfg = key_at(&digits, &positions, working.d) as usize;
            if !table[cfg].is_zero() {
                lp.objective[k] -= &table[cfg];
            }
        }
    }
    let cert = solve(&lp)?;
    match cert.kind {
        CertificateKind::Optimal => Ok(-cert.objective_value.expect("optimal value present")),
        // The feasible region is a subset of the probability simplex, which
        // is nonempty (uniform) and compact.
        _ => unreachable!("LTI energy program is always feasible and bounded"),
    }
}

/// Exact minimum of the symmetrised energy over all periodic patterns with
/// periods up to `max_period x max_period`, enumerated smallest area first.
/// Stops early (flagged `partial`) when the budget is exhausted, always
/// examining at least one pattern.
pub fn energy_upper_bound(h: &Hamiltonian, max_period: usize) -> Result<PeriodicSearch> {
    energy_upper_bound_with_budget(h, max_period, DEFAULT_BUDGET)
}

/// As [`energy_upper_bound`] with an explicit pattern budget.
pub fn energy_upper_bound_with_budget(
    h: &Hamiltonian,
    max_period: usize,
    budget: u64,
) -> Result<PeriodicSearch> {
    if max_period == 0 {
        return Err(Error::structural("maximum period must be at least 1"));
    }
    if h.terms.is_empty() {
        return Err(Error::structural("Hamiltonian has no terms"));
    }
    let mut blocks: Vec<(usize, usize)> = (1..=max_period)
        .flat_map(|m| (1..=max_period).map(move |n| (m, n)))
        .collect();
    blocks.sort_by_key(|&(m, n)| (m * n, m, n));

    let mut best: Option<(Rat, Pattern)> = None;
    let mut remaining = budget;
    let mut partial = false;
    let mut examined = 0u64;
    'outer: for (m, n) in blocks {
        let Ok(total) = config_count(h.d, m * n) else {
            partial = true;
            break;
        };
        for key in 0..total {
            if examined > 0 && remaining == 0 {
                partial = true;
                break 'outer;
            }
            remaining = remaining.saturating_sub(1);
            examined += 1;
            let digits = decode_config(key, h.d, m * n);
            let rows: Vec<Vec<u8>> = (0..n)
                .map(|y| digits[y * m..(y + 1) * m].to_vec())
                .collect();
            let pattern = Pattern::new(h.d, rows)?;
            let energy = h.pattern_energy(&pattern)?;
            let improves = match &best {
                None => true,
                Some((cur, _)) => energy < *cur,
            };
            if improves {
                best = Some((energy, pattern));
            }
        }
    }
    let (value, witness) = best.expect("at least one pattern examined");
    Ok(PeriodicSearch {
        value,
        witness,
        partial,
    })
}

/// Assemble certified bounds: the level-`n` lower bound and the periodic
/// upper bound with its witness.  When the two values coincide the energy is
/// exact.
pub fn energy_bounds(h: &Hamiltonian, n: usize, max_period: usize) -> Result<EnergyBounds> {
    energy_bounds_with_budget(h, n, max_period, DEFAULT_BUDGET)
}

/// As [`energy_bounds`] with an explicit budget shared by both sides.
pub fn energy_bounds_with_budget(
    h: &Hamiltonian,
    n: usize,
    max_period: usize,
    budget: u64,
) -> Result<EnergyBounds> {
    let lower = energy_lower_bound_with_budget(h, n, budget)?;
    let search = energy_upper_bound_with_budget(h, max_period, budget)?;
    debug_assert!(lower <= search.value, "bounds crossed: {lower} > {}", search.value);
    Ok(EnergyBounds {
        lower,
        upper: search.value,
        witness_pattern: Some(search.witness),
        partial: search.partial,
    })
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct HamiltonianTermDto {
    region: Vec<[i64; 2]>,
    values: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct HamiltonianDto {
    d: usize,
    terms: Vec<HamiltonianTermDto>,
}

impl From<Hamiltonian> for HamiltonianDto {
    fn from(h: Hamiltonian) -> HamiltonianDto {
        HamiltonianDto {
            d: h.d,
            terms: h
                .terms
                .into_iter()
                .map(|(region, table)| HamiltonianTermDto {
                    region: region.sites().iter().map(|&(x, y)| [x, y]).collect(),
                    values: table
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<HamiltonianDto> for Hamiltonian {
    type Error = Error;

    fn try_from(dto: HamiltonianDto) -> Result<Hamiltonian> {
        let mut terms = Vec::with_capacity(dto.terms.len());
        for term in dto.terms {
            let region = Region::new(term.region.iter().map(|&[x, y]| (x, y)))?;
            let len = config_count(dto.d, region.len())?;
            let mut table = vec![Rat::zero(); len as usize];
            for (key, value) in &term.values {
                let k: u64 = key
                    .parse()
                    .map_err(|_| Error::structural(format!("invalid configuration key {key:?}")))?;
                if k >= len {
                    return Err(Error::structural(format!(
                        "configuration key {k} out of range for term"
                    )));
                }
                table[k as usize] = parse_rat(value)?;
            }
            terms.push((region, table));
        }
        Hamiltonian::new(dto.d, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlp::verify_certificate;
    use crate::exactsets::{disagreement_nnn_spec, noncommuting_cycle_spec};
    use crate::lattice::{pair_distribution, symmetrize_pattern};
    use crate::rat::{rat, rat_int};
    use num::Signed;

    fn pair_spec(d: usize, tables: Vec<(Region, Vec<Vec<Rat>>)>) -> MarginalSpec {
        let entries = tables
            .into_iter()
            .map(|(region, table)| {
                let dist = pair_distribution(d, &region, &table).unwrap();
                (region, dist)
            })
            .collect();
        MarginalSpec::new(d, entries).unwrap()
    }

    fn all_pair_targets() -> Vec<Region> {
        vec![
            Region::pair_h(),
            Region::pair_v(),
            Region::pair_plus(),
            Region::pair_minus(),
        ]
    }

    #[test]
    fn disagreement_spec_infeasible_at_level_two() {
        let spec = disagreement_nnn_spec();
        let program = strip_program_with_budget(&spec, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(program.t, 2);
        let cert = solve_feasibility(&program.lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Infeasible);
        assert!(verify_certificate(&program.lp, &cert));
    }

    #[test]
    fn noncommuting_cycle_spec_infeasible_at_level_two() {
        let spec = noncommuting_cycle_spec();
        let program = strip_program_with_budget(&spec, 2, DEFAULT_BUDGET).unwrap();
        let cert = solve_feasibility(&program.lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Infeasible);
        assert!(verify_certificate(&program.lp, &cert));
    }

    #[test]
    fn symmetrized_patterns_pass_all_levels() {
        let patterns = [
            Pattern::new(2, vec![vec![0, 1], vec![1, 0]]).unwrap(),
            Pattern::new(2, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]).unwrap(),
            Pattern::new(3, vec![vec![0, 1, 2]]).unwrap(),
        ];
        for pattern in &patterns {
            let spec = symmetrize_pattern(pattern, &all_pair_targets()).unwrap();
            for n in 2..=4 {
                let cert = strip_feasible(&spec, n).unwrap();
                assert_eq!(
                    cert.kind,
                    CertificateKind::Feasible,
                    "level {n} rejected a symmetrised pattern"
                );
            }
        }
    }

    #[test]
    fn square_matches_strip_on_examples() {
        // Uniform product spec: feasible.
        let uniform = vec![
            vec![rat(1, 4), rat(1, 4)],
            vec![rat(1, 4), rat(1, 4)],
        ];
        let spec = pair_spec(
            2,
            vec![
                (Region::pair_h(), uniform.clone()),
                (Region::pair_v(), uniform),
            ],
        );
        let cert = square_feasible(&spec, 2).unwrap();
        assert_eq!(cert.kind, CertificateKind::Feasible);

        // The disagreement spec is infeasible for the square too.
        let cert = square_feasible(&disagreement_nnn_spec(), 2).unwrap();
        assert_eq!(cert.kind, CertificateKind::Infeasible);

        // Symmetrised checkerboard passes the 3x3 square.
        let checker = Pattern::new(2, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let spec = symmetrize_pattern(&checker, &all_pair_targets()).unwrap();
        let cert = square_feasible(&spec, 3).unwrap();
        assert_eq!(cert.kind, CertificateKind::Feasible);
    }

    #[test]
    fn verdict_invariant_under_transposition() {
        let spec = noncommuting_cycle_spec();
        let rotated = rotate_spec(&spec);
        let a = strip_feasible(&spec, 2).unwrap();
        let b = strip_feasible(&rotated, 2).unwrap();
        assert_eq!(a.kind, b.kind);
    }

    #[test]
    fn tall_specs_are_transposed() {
        // A vertical-only spec is taller than wide; the builder should
        // rotate it into a horizontal strip of height 1.
        let table = vec![
            vec![rat(1, 2), rat_int(0)],
            vec![rat_int(0), rat(1, 2)],
        ];
        let spec = pair_spec(2, vec![(Region::pair_v(), table)]);
        let program = strip_program_with_budget(&spec, 2, DEFAULT_BUDGET).unwrap();
        assert!(program.transposed);
        assert_eq!(program.t, 1);
        let cert = solve_feasibility(&program.lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Feasible);
    }

    #[test]
    fn budget_guard_refuses_oversized_levels() {
        let spec = disagreement_nnn_spec();
        let err = strip_feasible_with_budget(&spec, 11, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
        let err = square_feasible_with_budget(&spec, 5, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn level_below_region_width_is_rejected() {
        let spec = disagreement_nnn_spec();
        let err = strip_feasible(&spec, 1).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    fn delta_table(d: usize) -> Vec<Vec<Rat>> {
        (0..d)
            .map(|a| {
                (0..d)
                    .map(|b| if a == b { Rat::one() } else { Rat::zero() })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn antiferromagnetic_ground_energy_is_zero() {
        // Penalise equal nearest neighbours; the checkerboard achieves zero
        // and the table is nonnegative.
        let delta = delta_table(2);
        let h = Hamiltonian::new(
            2,
            vec![
                Hamiltonian::pair_term(2, Region::pair_h(), &delta).unwrap(),
                Hamiltonian::pair_term(2, Region::pair_v(), &delta).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(energy_lower_bound(&h, 2).unwrap(), rat_int(0));
        let search = energy_upper_bound(&h, 2).unwrap();
        assert_eq!(search.value, rat_int(0));
        assert_eq!(
            search.witness.rows(),
            &[vec![0, 1], vec![1, 0]],
            "expected the first checkerboard in enumeration order"
        );
        assert!(!search.partial);
    }

    #[test]
    fn reward_single_horizontal_step_gives_three_halves() {
        // Reward the horizontal pair (0, 1) and every vertical pair; the
        // alternating row attains the level-2 relaxation value, so the
        // maximised form is exactly 3/2 (here: lower = upper = -3/2).
        let mut reward_01 = vec![vec![rat_int(0); 2]; 2];
        reward_01[0][1] = rat_int(-1);
        let all = vec![vec![rat_int(-1); 2]; 2];
        let h = Hamiltonian::new(
            2,
            vec![
                Hamiltonian::pair_term(2, Region::pair_h(), &reward_01).unwrap(),
                Hamiltonian::pair_term(2, Region::pair_v(), &all).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(energy_lower_bound(&h, 2).unwrap(), rat(-3, 2));
        let search = energy_upper_bound(&h, 2).unwrap();
        assert_eq!(search.value, rat(-3, 2));
        assert_eq!(search.witness.rows(), &[vec![0, 1]]);
    }

    #[test]
    fn constant_hamiltonian_energy() {
        let c = rat(5, 3);
        let table = vec![vec![c.clone(); 2]; 2];
        let h = Hamiltonian::new(
            2,
            vec![
                Hamiltonian::pair_term(2, Region::pair_h(), &table).unwrap(),
                Hamiltonian::pair_term(2, Region::pair_v(), &table).unwrap(),
                Hamiltonian::pair_term(2, Region::pair_plus(), &table).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(energy_lower_bound(&h, 2).unwrap(), rat_int(5));
        assert_eq!(energy_upper_bound(&h, 1).unwrap().value, rat_int(5));
    }

    #[test]
    fn frustrated_diagonals_stay_positive() {
        // Penalising agreement on h, v, and both diagonals cannot reach
        // zero with periods up to 2: stripes still agree along one axis.
        let delta = delta_table(2);
        let h = Hamiltonian::new(
            2,
            vec![
                Hamiltonian::pair_term(2, Region::pair_h(), &delta).unwrap(),
                Hamiltonian::pair_term(2, Region::pair_v(), &delta).unwrap(),
                Hamiltonian::pair_term(2, Region::pair_plus(), &delta).unwrap(),
                Hamiltonian::pair_term(2, Region::pair_minus(), &delta).unwrap(),
            ],
        )
        .unwrap();
        let search = energy_upper_bound(&h, 2).unwrap();
        assert_eq!(search.value, rat_int(1));
        assert_eq!(search.witness.rows(), &[vec![0], vec![1]]);
        assert!(search.value.is_positive());
    }

    #[test]
    fn bounds_are_monotone_and_sandwiched() {
        let mut table = vec![vec![rat_int(0); 2]; 2];
        table[0][0] = rat(1, 3);
        table[0][1] = rat_int(-1);
        table[1][0] = rat(1, 2);
        let h = Hamiltonian::new(
            2,
            vec![
                Hamiltonian::pair_term(2, Region::pair_h(), &table).unwrap(),
                Hamiltonian::pair_term(2, Region::pair_v(), &delta_table(2)).unwrap(),
            ],
        )
        .unwrap();
        let e2 = energy_lower_bound(&h, 2).unwrap();
        let e3 = energy_lower_bound(&h, 3).unwrap();
        assert!(e2 <= e3, "levels must be monotone: {e2} then {e3}");
        let bounds = energy_bounds(&h, 2, 3).unwrap();
        assert!(bounds.lower <= bounds.upper);
        let witness = bounds.witness_pattern.unwrap();
        assert_eq!(h.pattern_energy(&witness).unwrap(), bounds.upper);
    }

    #[test]
    fn upper_bound_budget_flags_partial() {
        let h = Hamiltonian::new(
            2,
            vec![Hamiltonian::pair_term(2, Region::pair_h(), &delta_table(2)).unwrap()],
        )
        .unwrap();
        let search = energy_upper_bound_with_budget(&h, 3, 5).unwrap();
        assert!(search.partial);
        // Still a genuine attained upper bound.
        assert_eq!(h.pattern_energy(&search.witness).unwrap(), search.value);
    }

    #[test]
    fn hamiltonian_json_round_trip() {
        let mut table = vec![vec![rat_int(0); 2]; 2];
        table[1][0] = rat(-7, 2);
        let h = Hamiltonian::new(
            2,
            vec![Hamiltonian::pair_term(2, Region::pair_v(), &table).unwrap()],
        )
        .unwrap();
        let json = serde_json::to_string(&h).unwrap();
        let back: Hamiltonian = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["terms"][0]["region"][0], serde_json::json!([0, -1]));
    }

    #[test]
    fn pattern_energy_matches_symmetrized_contraction() {
        // Independent path: contract the symmetrised marginal tables with
        // the Hamiltonian tables and compare.
        let p = Pattern::new(2, vec![vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        let delta = delta_table(2);
        let h = Hamiltonian::new(
            2,
            vec![
                Hamiltonian::pair_term(2, Region::pair_h(), &delta).unwrap(),
                Hamiltonian::pair_term(2, Region::pair_minus(), &delta).unwrap(),
            ],
        )
        .unwrap();
        let spec = symmetrize_pattern(&p, &[Region::pair_h(), Region::pair_minus()]).unwrap();
        let mut expected = Rat::zero();
        for ((_, dist), (_, table)) in spec.entries.iter().zip(&h.terms) {
            for (key, prob) in dist.iter() {
                expected += prob * &table[key as usize];
            }
        }
        assert_eq!(h.pattern_energy(&p).unwrap(), expected);
    }
}
