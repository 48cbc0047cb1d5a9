//! Exactly solvable marginal families.
//!
//! For a handful of small cases the level-2 strip relaxation is tight: a
//! family of pair marginals is realizable by a translation-invariant measure
//! exactly when it lies in the convex hull of an explicit finite vertex
//! list, and the minimum energy of a local Hamiltonian is attained at one of
//! those vertices.  This module ships the vertex libraries for those cases
//! (each vertex with its symmetry-class label and a generating periodic
//! pattern), the decision procedures built on them, the one-dimensional
//! reflection-symmetric chain solver, and two canonical specifications that
//! pass every single-site consistency check yet admit no translation-
//! invariant measure.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exactlp::{solve, solve_feasibility, CertificateKind, LinearProgram, RowKind};
use crate::hierarchy::DEFAULT_BUDGET;
use crate::lattice::{
    check_dimension, config_count, decode_config, encode_config, pair_distribution, pair_table,
    symmetrize_pattern, Distribution, MarginalSpec, Pattern, Region,
};
use crate::polytope::{marginal_symmetry_group, project_lti_seeded, quotient_classes};
use crate::rat::{dot, parse_rat, rat, Rat};
use crate::Result;

// ---------------------------------------------------------------------------
// Canonical unrealizable specifications
// ---------------------------------------------------------------------------

fn pair_spec(d: usize, tables: Vec<(Region, Vec<Vec<Rat>>)>) -> Result<MarginalSpec> {
    let entries = tables
        .into_iter()
        .map(|(region, table)| {
            let dist = pair_distribution(d, &region, &table)?;
            Ok((region, dist))
        })
        .collect::<Result<_>>()?;
    MarginalSpec::new(d, entries)
}

/// The two-outcome specification demanding disagreement along both axes and
/// both diagonals.  Every single-site marginal is uniform, yet no
/// translation-invariant measure complies: a configuration alternating along
/// both axes must agree along diagonals.
pub fn disagreement_nnn_spec() -> MarginalSpec {
    let odd = vec![
        vec![Rat::zero(), rat(1, 2)],
        vec![rat(1, 2), Rat::zero()],
    ];
    pair_spec(
        2,
        vec![
            (Region::pair_h(), odd.clone()),
            (Region::pair_v(), odd.clone()),
            (Region::pair_plus(), odd.clone()),
            (Region::pair_minus(), odd),
        ],
    )
    .expect("the disagreement tables are valid distributions")
}

/// The three-outcome nearest-neighbour specification whose horizontal step
/// is the cycle `0 -> 2 -> 1 -> 0` and whose vertical step swaps 1 and 2.
/// The two permutations commute nowhere, so no 2 x 2 window is consistent
/// with both, although every single-site marginal is uniform.
pub fn noncommuting_cycle_spec() -> MarginalSpec {
    let third = rat(1, 3);
    let mut h = vec![vec![Rat::zero(); 3]; 3];
    h[0][2] = third.clone();
    h[1][0] = third.clone();
    h[2][1] = third.clone();
    let mut v = vec![vec![Rat::zero(); 3]; 3];
    v[0][0] = third.clone();
    v[1][2] = third.clone();
    v[2][1] = third;
    pair_spec(3, vec![(Region::pair_h(), h), (Region::pair_v(), v)])
        .expect("the cycle tables are valid distributions")
}

/// The single-site consistency check: every one-site marginal induced by any
/// entry of the specification must coincide (after translating to the
/// origin).  Necessary for realizability, and cheap.
pub fn check_trivial_consistency(spec: &MarginalSpec) -> Result<bool> {
    let mut reference: Option<Distribution> = None;
    for (region, dist) in &spec.entries {
        for &(x, y) in region.sites() {
            let site = Region::new([(x, y)])?;
            let marginal = dist.marginalize(&site)?.translate(-x, -y);
            match &reference {
                None => reference = Some(marginal),
                Some(r) => {
                    if *r != marginal {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Vertex libraries
// ---------------------------------------------------------------------------

/// The exactly solved families backed by a finite vertex library.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LibraryCase {
    /// Two outcomes, nearest-neighbour pairs (horizontal and vertical).
    D2Nn,
    /// Two outcomes, nearest and next-nearest pairs (both diagonals too).
    D2Nnn,
    /// Three outcomes, nearest-neighbour pairs.
    D3Nn,
}

impl LibraryCase {
    /// Stable identifier, as used in fixture files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            LibraryCase::D2Nn => "d2_nn",
            LibraryCase::D2Nnn => "d2_nnn",
            LibraryCase::D3Nn => "d3_nn",
        }
    }

    /// Parse an identifier (hyphens and underscores are interchangeable).
    /// Unknown names are rejected with a pointer to the relaxation
    /// hierarchy, which covers every case at the cost of one-sided answers.
    pub fn from_name(name: &str) -> Result<LibraryCase> {
        match name.replace('-', "_").as_str() {
            "d2_nn" => Ok(LibraryCase::D2Nn),
            "d2_nnn" => Ok(LibraryCase::D2Nnn),
            "d3_nn" => Ok(LibraryCase::D3Nn),
            other => Err(Error::domain(format!(
                "no exact vertex library covers `{other}`; use the strip relaxation hierarchy instead"
            ))),
        }
    }

    /// Local dimension of the case.
    pub fn d(self) -> usize {
        match self {
            LibraryCase::D2Nn | LibraryCase::D2Nnn => 2,
            LibraryCase::D3Nn => 3,
        }
    }

    /// Target pair regions, in block order.
    pub fn targets(self) -> Vec<Region> {
        match self {
            LibraryCase::D2Nn | LibraryCase::D3Nn => vec![Region::pair_h(), Region::pair_v()],
            LibraryCase::D2Nnn => vec![
                Region::pair_h(),
                Region::pair_v(),
                Region::pair_plus(),
                Region::pair_minus(),
            ],
        }
    }
}

/// One vertex of a library: its coordinates, the marginal specification it
/// encodes, its symmetry-class label, and a periodic pattern whose
/// symmetrisation reproduces it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct LibraryVertex {
    /// Symmetry-class label (`C1`, `C2`, ...).
    pub label: String,
    /// Role-ordered coordinates: blocks follow the case's target order, and
    /// within a block the table `P(a, b)` is flattened with `a` (the value
    /// at the origin) major.
    pub vector: Vec<Rat>,
    /// The same point as a marginal specification.
    pub spec: MarginalSpec,
    /// A periodic pattern with `symmetrize_pattern(generator, targets) == spec`.
    pub generator: Pattern,
}

/// A complete vertex library for one exactly solved case.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexLibrary {
    /// Which case this library solves.
    pub case: LibraryCase,
    /// Local dimension.
    pub d: usize,
    /// Target pair regions, in block order.
    pub targets: Vec<Region>,
    /// Class labels in canonical order.
    pub class_labels: Vec<String>,
    /// Vertices grouped by class (classes in label order, members sorted by
    /// coordinates).
    pub vertices: Vec<LibraryVertex>,
}

fn dir_name(region: &Region) -> &'static str {
    if *region == Region::pair_h() {
        "h"
    } else if *region == Region::pair_v() {
        "v"
    } else if *region == Region::pair_plus() {
        "plus"
    } else {
        "minus"
    }
}

fn dir_from_name(name: &str) -> Result<Region> {
    match name {
        "h" => Ok(Region::pair_h()),
        "v" => Ok(Region::pair_v()),
        "plus" => Ok(Region::pair_plus()),
        "minus" => Ok(Region::pair_minus()),
        other => Err(Error::structural(format!("unknown pair direction `{other}`"))),
    }
}

/// Flatten a pair-marginal specification into role-ordered coordinates.
pub fn vector_of_spec(spec: &MarginalSpec, targets: &[Region]) -> Result<Vec<Rat>> {
    let d = spec.d;
    let mut out = Vec::with_capacity(targets.len() * d * d);
    for region in targets {
        let dist = spec.entry(region).ok_or_else(|| {
            Error::structural(format!(
                "specification lacks an entry for the `{}` pair",
                dir_name(region)
            ))
        })?;
        for row in pair_table(dist)? {
            out.extend(row);
        }
    }
    Ok(out)
}

/// Rebuild the marginal specification encoded by role-ordered coordinates.
fn spec_of_vector(d: usize, targets: &[Region], coords: &[Rat]) -> Result<MarginalSpec> {
    if coords.len() != targets.len() * d * d {
        return Err(Error::structural(format!(
            "coordinate vector has {} entries, expected {}",
            coords.len(),
            targets.len() * d * d
        )));
    }
    let mut entries = Vec::with_capacity(targets.len());
    for (g, region) in targets.iter().enumerate() {
        let block = &coords[g * d * d..(g + 1) * d * d];
        let table: Vec<Vec<Rat>> = block.chunks(d).map(|c| c.to_vec()).collect();
        entries.push((region.clone(), pair_distribution(d, region, &table)?));
    }
    MarginalSpec::new(d, entries)
}

#[derive(Serialize, Deserialize)]
struct LibraryDto {
    case: String,
    d: usize,
    targets: Vec<String>,
    provenance: String,
    classes: Vec<String>,
    vertices: Vec<LibraryVertexDto>,
}

#[derive(Serialize, Deserialize)]
struct LibraryVertexDto {
    class: String,
    coords: Vec<String>,
    generator: Pattern,
}

fn library_from_json(text: &str) -> Result<VertexLibrary> {
    let dto: LibraryDto = serde_json::from_str(text)
        .map_err(|e| Error::structural(format!("malformed vertex library JSON: {e}")))?;
    let case = LibraryCase::from_name(&dto.case)?;
    if dto.d != case.d() {
        return Err(Error::structural(format!(
            "library for `{}` must have local dimension {}, found {}",
            dto.case,
            case.d(),
            dto.d
        )));
    }
    let targets: Vec<Region> = dto
        .targets
        .iter()
        .map(|n| dir_from_name(n))
        .collect::<Result<_>>()?;
    if targets != case.targets() {
        return Err(Error::structural(format!(
            "library target list does not match case `{}`",
            dto.case
        )));
    }
    let mut vertices = Vec::with_capacity(dto.vertices.len());
    for v in dto.vertices {
        if !dto.classes.contains(&v.class) {
            return Err(Error::structural(format!(
                "vertex references unlisted class `{}`",
                v.class
            )));
        }
        let vector: Vec<Rat> = v.coords.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?;
        let spec = spec_of_vector(dto.d, &targets, &vector)?;
        if v.generator.d() != dto.d {
            return Err(Error::structural(
                "generator pattern has the wrong local dimension",
            ));
        }
        vertices.push(LibraryVertex {
            label: v.class,
            vector,
            spec,
            generator: v.generator,
        });
    }
    Ok(VertexLibrary {
        case,
        d: dto.d,
        targets,
        class_labels: dto.classes,
        vertices,
    })
}

fn library_to_json(lib: &VertexLibrary) -> String {
    let dto = LibraryDto {
        case: lib.case.name().to_string(),
        d: lib.d,
        targets: lib.targets.iter().map(|r| dir_name(r).to_string()).collect(),
        provenance: "regenerated by `cargo run --release --example generate_fixtures`; \
                     vertices are grouped by symmetry class (labels in canonical \
                     representative order) and their coordinates are role-ordered \
                     pair tables, origin value major"
            .to_string(),
        classes: lib.class_labels.clone(),
        vertices: lib
            .vertices
            .iter()
            .map(|v| LibraryVertexDto {
                class: v.label.clone(),
                coords: v.vector.iter().map(crate::rat::format_rat).collect(),
                generator: v.generator.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&dto).expect("library serialization cannot fail")
}

impl VertexLibrary {
    /// The embedded library for `case`.
    ///
    /// Fixtures are compiled into the binary and parsed on first use; they
    /// are regression-checked against full regeneration in the test suite.
    pub fn get(case: LibraryCase) -> &'static VertexLibrary {
        static D2_NN: OnceLock<VertexLibrary> = OnceLock::new();
        static D2_NNN: OnceLock<VertexLibrary> = OnceLock::new();
        static D3_NN: OnceLock<VertexLibrary> = OnceLock::new();
        let (cell, text): (&OnceLock<VertexLibrary>, &str) = match case {
            LibraryCase::D2Nn => (&D2_NN, include_str!("../fixtures/library_d2_nn.json")),
            LibraryCase::D2Nnn => (&D2_NNN, include_str!("../fixtures/library_d2_nnn.json")),
            LibraryCase::D3Nn => (&D3_NN, include_str!("../fixtures/library_d3_nn.json")),
        };
        cell.get_or_init(|| {
            library_from_json(text).expect("embedded vertex library fixture is valid")
        })
    }

    /// Serialize to the fixture JSON form.
    pub fn to_json(&self) -> String {
        library_to_json(self)
    }

    /// Parse the fixture JSON form.
    pub fn from_json(text: &str) -> Result<VertexLibrary> {
        library_from_json(text)
    }
}

/// Regenerate a vertex library from scratch: project the level-2 strip onto
/// the case's pair blocks, quotient the vertices by the full symmetry group
/// to assign class labels, and search small period boxes for a generating
/// pattern per vertex (first match in a deterministic enumeration).
pub fn generate_library(case: LibraryCase, seed: u64, budget: u64) -> Result<VertexLibrary> {
    let d = case.d();
    let targets = case.targets();
    let projection = project_lti_seeded(d, (2, 2), &targets, seed, budget)?;
    let verts = projection
        .polytope
        .v_rep
        .clone()
        .expect("projections carry vertices");
    let group = marginal_symmetry_group(d, &targets)?;
    let classes = quotient_classes(&projection.polytope, &group)?;
    let class_labels: Vec<String> = (1..=classes.len()).map(|i| format!("C{i}")).collect();

    // Deterministic generator search over period boxes of growing area.
    let max_area = if d == 2 { 16 } else { 12 };
    let mut unmatched: BTreeSet<Vec<Rat>> = verts.iter().cloned().collect();
    let mut generators: std::collections::BTreeMap<Vec<Rat>, Pattern> =
        std::collections::BTreeMap::new();
    'search: for area in 1..=max_area {
        for m in 1..=area {
            if area % m != 0 {
                continue;
            }
            let count = config_count(d, area)?;
            for key in 0..count {
                let digits = decode_config(key, d, area);
                let rows: Vec<Vec<u8>> = digits.chunks(m).map(|c| c.to_vec()).collect();
                let pattern = Pattern::new(d, rows)?;
                let spec = symmetrize_pattern(&pattern, &targets)?;
                let vector = vector_of_spec(&spec, &targets)?;
                if unmatched.remove(&vector) {
                    generators.insert(vector, pattern);
                    if unmatched.is_empty() {
                        break 'search;
                    }
                }
            }
        }
    }
    if !unmatched.is_empty() {
        return Err(Error::structural(format!(
            "no generating pattern found for {} vertices within period boxes of area {max_area}",
            unmatched.len()
        )));
    }

    let mut vertices = Vec::with_capacity(verts.len());
    for (ci, class) in classes.iter().enumerate() {
        for member in &class.members {
            vertices.push(LibraryVertex {
                label: class_labels[ci].clone(),
                vector: member.clone(),
                spec: spec_of_vector(d, &targets, member)?,
                generator: generators
                    .get(member)
                    .expect("every vertex was matched")
                    .clone(),
            });
        }
    }
    Ok(VertexLibrary {
        case,
        d,
        targets,
        class_labels,
        vertices,
    })
}

// ---------------------------------------------------------------------------
// Decision procedures
// ---------------------------------------------------------------------------

/// Exact membership of a role-ordered point in the convex hull of a
/// library's vertices.
fn in_library_hull(lib: &VertexLibrary, point: &[Rat]) -> Result<bool> {
    let m = lib.vertices.len();
    if m == 0 {
        return Err(Error::structural("vertex library is empty"));
    }
    let mut lp = LinearProgram::new(m);
    lp.add_row(
        RowKind::Equality,
        (0..m).map(|i| (i, Rat::one())).collect(),
        Rat::one(),
    );
    for (j, target) in point.iter().enumerate() {
        let entries: Vec<(usize, Rat)> = lib
            .vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.vector[j].is_zero())
            .map(|(i, v)| (i, v.vector[j].clone()))
            .collect();
        lp.add_row(RowKind::Equality, entries, target.clone());
    }
    Ok(solve_feasibility(&lp)?.kind == CertificateKind::Feasible)
}

fn validate_table(d: usize, table: &[Vec<Rat>]) -> Result<()> {
    if table.len() != d || table.iter().any(|r| r.len() != d) {
        return Err(Error::structural(format!("pair table must be {d} x {d}")));
    }
    let mut total = Rat::zero();
    for row in table {
        for p in row {
            if p.is_negative() {
                return Err(Error::structural(format!("negative probability {p} in pair table")));
            }
            total += p;
        }
    }
    if !total.is_one() {
        return Err(Error::structural(format!(
            "pair table sums to {total}, not 1"
        )));
    }
    Ok(())
}

#[cfg(debug_assertions)]
fn debug_check_strip_agreement(spec: &MarginalSpec, verdict: bool) {
    let cert = crate::hierarchy::strip_feasible(spec, 2).expect("level-2 strip check");
    debug_assert_eq!(
        verdict,
        cert.kind == CertificateKind::Feasible,
        "hull membership disagrees with the level-2 strip relaxation"
    );
}

/// Decide realizability of two-outcome nearest-neighbour marginals on the
/// `k`-dimensional lattice (`k` = 2 or 3), one pair table per axis.
///
/// For two outcomes the single-site consistency condition is already
/// sufficient: realizability holds exactly when all row and column marginals
/// of all the tables coincide.
pub fn check_d2_nn(tables: &[Vec<Vec<Rat>>], k: usize) -> Result<bool> {
    if k != 2 && k != 3 {
        return Err(Error::domain(format!(
            "the two-outcome nearest-neighbour family is solved for lattice dimensions 2 and 3, not {k}"
        )));
    }
    if tables.len() != k {
        return Err(Error::structural(format!(
            "expected one pair table per axis ({k}), found {}",
            tables.len()
        )));
    }
    for table in tables {
        validate_table(2, table)?;
    }
    let mut marginals: Vec<Vec<Rat>> = Vec::with_capacity(2 * k);
    for table in tables {
        let rows: Vec<Rat> = table.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<Rat> = (0..2)
            .map(|b| table.iter().map(|r| r[b].clone()).sum())
            .collect();
        marginals.push(rows);
        marginals.push(cols);
    }
    let verdict = marginals.windows(2).all(|w| w[0] == w[1]);
    #[cfg(debug_assertions)]
    if k == 2 {
        let spec = pair_spec(
            2,
            vec![
                (Region::pair_h(), tables[0].clone()),
                (Region::pair_v(), tables[1].clone()),
            ],
        )
        .expect("tables validated above");
        debug_check_strip_agreement(&spec, verdict);
    }
    Ok(verdict)
}

/// Decide realizability of two-outcome nearest and next-nearest pair
/// marginals on the plane by exact membership in the hull of the thirteen
/// library vertices.
pub fn check_d2_nnn(
    p_h: &[Vec<Rat>],
    p_v: &[Vec<Rat>],
    p_plus: &[Vec<Rat>],
    p_minus: &[Vec<Rat>],
) -> Result<bool> {
    for table in [p_h, p_v, p_plus, p_minus] {
        validate_table(2, table)?;
    }
    let lib = VertexLibrary::get(LibraryCase::D2Nnn);
    let spec = pair_spec(
        2,
        vec![
            (Region::pair_h(), p_h.to_vec()),
            (Region::pair_v(), p_v.to_vec()),
            (Region::pair_plus(), p_plus.to_vec()),
            (Region::pair_minus(), p_minus.to_vec()),
        ],
    )?;
    let point = vector_of_spec(&spec, &lib.targets)?;
    let verdict = in_library_hull(lib, &point)?;
    #[cfg(debug_assertions)]
    debug_check_strip_agreement(&spec, verdict);
    Ok(verdict)
}

/// Decide realizability of three-outcome nearest-neighbour pair marginals on
/// the plane by exact membership in the hull of the ninety-eight library
/// vertices.
pub fn check_d3_nn(p_h: &[Vec<Rat>], p_v: &[Vec<Rat>]) -> Result<bool> {
    for table in [p_h, p_v] {
        validate_table(3, table)?;
    }
    let lib = VertexLibrary::get(LibraryCase::D3Nn);
    let spec = pair_spec(
        3,
        vec![
            (Region::pair_h(), p_h.to_vec()),
            (Region::pair_v(), p_v.to_vec()),
        ],
    )?;
    let point = vector_of_spec(&spec, &lib.targets)?;
    let verdict = in_library_hull(lib, &point)?;
    #[cfg(debug_assertions)]
    debug_check_strip_agreement(&spec, verdict);
    Ok(verdict)
}

/// Exact minimum energy over a solved family: minimize the energy functional
/// defined by one `d x d` table per target (role order, any sign) over the
/// library vertices.  Returns the minimum and the first vertex attaining it.
pub fn exact_energy_by_vertices(
    case: LibraryCase,
    tables: &[Vec<Vec<Rat>>],
) -> Result<(Rat, &'static LibraryVertex)> {
    let lib = VertexLibrary::get(case);
    let d = lib.d;
    if tables.len() != lib.targets.len() {
        return Err(Error::structural(format!(
            "expected {} energy tables, found {}",
            lib.targets.len(),
            tables.len()
        )));
    }
    let mut weights = Vec::with_capacity(lib.targets.len() * d * d);
    for table in tables {
        if table.len() != d || table.iter().any(|r| r.len() != d) {
            return Err(Error::structural(format!("energy table must be {d} x {d}")));
        }
        for row in table {
            weights.extend(row.iter().cloned());
        }
    }
    let mut best: Option<(Rat, &LibraryVertex)> = None;
    for vertex in &lib.vertices {
        let value = dot(&weights, &vertex.vector);
        match &best {
            Some((b, _)) if *b <= value => {}
            _ => best = Some((value, vertex)),
        }
    }
    let (value, vertex) = best.expect("libraries are nonempty");
    Ok((value, vertex))
}

// ---------------------------------------------------------------------------
// Reflection-symmetric chains
// ---------------------------------------------------------------------------

/// A distribution on the width-`s`, height-2 window, the natural state of a
/// chain of vertically mirrored column pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionSpec {
    s: usize,
    q: Distribution,
}

impl ReflectionSpec {
    /// Wrap a window distribution; the region must be `rect(s, 2)` with
    /// `s >= 2`.
    pub fn new(q: Distribution) -> Result<ReflectionSpec> {
        let region = q.region();
        let (x0, x1, y0, y1) = region.bounding_box();
        let s = (x1 - x0 + 1) as usize;
        let well_shaped = x0 == 0
            && y0 == 0
            && y1 == 1
            && region.len() as i64 == (x1 - x0 + 1) * 2
            && *region == Region::rect(s as i64, 2)?;
        if !well_shaped || s < 2 {
            return Err(Error::domain(
                "reflection specifications live on the rectangle {0..s-1} x {0..1} with s >= 2",
            ));
        }
        Ok(ReflectionSpec { s, q })
    }

    /// Window width.
    pub fn s(&self) -> usize {
        self.s
    }

    /// The window distribution.
    pub fn q(&self) -> &Distribution {
        &self.q
    }
}

/// Decide whether a window distribution extends to a translation-invariant,
/// reflection-symmetric measure on the two-row chain: it must be invariant
/// under both axis reflections of its window, and its left and right
/// `(s-1) x 2` marginals must coincide.
pub fn check_reflection_ti(spec: &ReflectionSpec) -> Result<bool> {
    let q = &spec.q;
    let s = spec.s as i64;
    let h = q.map_sites(|(x, y)| (s - 1 - x, y))?;
    if h != *q {
        return Ok(false);
    }
    let v = q.map_sites(|(x, y)| (x, 1 - y))?;
    if v != *q {
        return Ok(false);
    }
    let left = Region::rect(s - 1, 2)?;
    let right = left.translate(1, 0);
    Ok(q.marginalize(&left)? == q.marginalize(&right)?.translate(-1, 0))
}

/// Site-index permutation of `rect(s, 2)` under a window reflection.
fn window_permutation(s: usize, flip_x: bool, flip_y: bool) -> Vec<usize> {
    let mut perm = vec![0usize; 2 * s];
    for y in 0..2 {
        for x in 0..s {
            let nx = if flip_x { s - 1 - x } else { x };
            let ny = if flip_y { 1 - y } else { y };
            perm[y * s + x] = ny * s + nx;
        }
    }
    perm
}

fn permute_key(key: u64, d: usize, perm: &[usize]) -> u64 {
    let digits = decode_config(key, d, perm.len());
    let mut moved = vec![0u8; perm.len()];
    for (i, &v) in digits.iter().enumerate() {
        moved[perm[i]] = v;
    }
    encode_config(&moved, d)
}

/// Exact minimum expected energy of a reflection-symmetric window functional
/// over translation-invariant, reflection-symmetric chain states.
///
/// `f` assigns an energy to each configuration of `rect(s, 2)` (canonical
/// site order, first site most significant).  It must be invariant under
/// both window reflections; a violation is reported as a domain error naming
/// the broken symmetry.  The minimisation is an exact linear program over
/// window distributions constrained to both reflection invariances and the
/// one-step chain marginal equality.
pub fn solve_reflection_energy(d: usize, s: usize, f: &[Rat]) -> Result<Rat> {
    check_dimension(d)?;
    if s < 2 {
        return Err(Error::domain("the window width must be at least 2"));
    }
    let sites = 2 * s;
    let count = config_count(d, sites)?;
    if count > DEFAULT_BUDGET {
        return Err(Error::resource(format!(
            "window has {count} configurations, budget is {DEFAULT_BUDGET}"
        )));
    }
    let count = count as usize;
    if f.len() != count {
        return Err(Error::structural(format!(
            "energy table has {} entries, the window has {count} configurations",
            f.len()
        )));
    }
    let hperm = window_permutation(s, true, false);
    let vperm = window_permutation(s, false, true);
    for key in 0..count as u64 {
        if f[key as usize] != f[permute_key(key, d, &hperm) as usize] {
            return Err(Error::domain(
                "energy table is not invariant under the horizontal reflection of the window",
            ));
        }
        if f[key as usize] != f[permute_key(key, d, &vperm) as usize] {
            return Err(Error::domain(
                "energy table is not invariant under the vertical reflection of the window",
            ));
        }
    }

    let mut lp = LinearProgram::new(count);
    lp.add_row(
        RowKind::Equality,
        (0..count).map(|k| (k, Rat::one())).collect(),
        Rat::one(),
    );
    for perm in [&hperm, &vperm] {
        for key in 0..count as u64 {
            let image = permute_key(key, d, perm);
            if key < image {
                lp.add_row(
                    RowKind::Equality,
                    vec![(key as usize, Rat::one()), (image as usize, -Rat::one())],
                    Rat::zero(),
                );
            }
        }
    }
    // One-step chain marginal equality: the left and right (s-1) x 2
    // sub-window marginals agree.
    let subcount = config_count(d, 2 * (s - 1))? as usize;
    let left_pos: Vec<usize> = (0..2)
        .flat_map(|y| (0..s - 1).map(move |x| y * s + x))
        .collect();
    let right_pos: Vec<usize> = (0..2)
        .flat_map(|y| (0..s - 1).map(move |x| y * s + x + 1))
        .collect();
    let mut rows: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); subcount];
    for key in 0..count as u64 {
        let digits = decode_config(key, d, sites);
        let lkey = encode_config(
            &left_pos.iter().map(|&i| digits[i]).collect::<Vec<_>>(),
            d,
        ) as usize;
        let rkey = encode_config(
            &right_pos.iter().map(|&i| digits[i]).collect::<Vec<_>>(),
            d,
        ) as usize;
        if lkey == rkey {
            continue;
        }
        rows[lkey].push((key as usize, Rat::one()));
        rows[rkey].push((key as usize, -Rat::one()));
    }
    for entries in rows {
        if !entries.is_empty() {
            lp.add_row(RowKind::Equality, entries, Rat::zero());
        }
    }
    lp.objective = f.iter().map(|x| -x.clone()).collect();
    let cert = solve(&lp)?;
    match cert.kind {
        CertificateKind::Optimal => Ok(-cert.objective_value.expect("optimal verdicts carry a value")),
        other => Err(Error::structural(format!(
            "the reflection chain program should be solvable, got {other:?}"
        ))),
    }
}
