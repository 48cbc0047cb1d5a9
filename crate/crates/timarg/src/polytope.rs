//! Exact polyhedral computation over the rationals.
//!
//! This module supplies the geometric backbone for the marginal analyses:
//! a double-description kernel converting between vertex and inequality
//! representations, Fourier–Motzkin variable elimination with LP-based
//! redundancy pruning, exact projection of the translation-invariant strip
//! onto blocks of marginal coordinates, facet verification against a vertex
//! list, and symmetry quotients of vertex sets under coordinate-permutation
//! groups.  Every routine is exact; no floating point is used anywhere.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, Integer, One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exactlp::{
    solve, solve_feasibility, CertificateKind, LinearProgram, RowKind, VarBound,
};
use crate::hierarchy::{decode_into, key_at, lti_strip_lp, DEFAULT_BUDGET};
use crate::lattice::{check_dimension, config_count, Region};
use crate::rat::{dot, format_rat, parse_rat, Rat};
use crate::Result;

// ---------------------------------------------------------------------------
// Scaling and small linear algebra
// ---------------------------------------------------------------------------

/// Scale a rational vector by a positive factor so its entries become
/// coprime integers.  The zero vector is returned unchanged.
fn normalize_scale(v: &[Rat]) -> Vec<Rat> {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let mut g = BigInt::zero();
    for i in &ints {
        g = g.gcd(i);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter()
        .map(|i| Rat::from_integer(i / &g))
        .collect()
}

/// Flip the sign so the first nonzero entry is positive (for objects whose
/// sign carries no meaning, such as lineality basis vectors).
fn canonical_sign(mut v: Vec<Rat>) -> Vec<Rat> {
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in v.iter_mut() {
                *x = -x.clone();
            }
        }
    }
    v
}

fn vec_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Rank of the row space (Gaussian elimination over the rationals).
fn row_rank(mut rows: Vec<Vec<Rat>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        let pivot = pivot_row[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = &row[col] / &pivot;
                for c in col..ncols {
                    let delta = &f * &pivot_row[c];
                    row[c] = &row[c] - &delta;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Dimension of the affine hull of a nonempty point set.
fn affine_dim(points: &[Vec<Rat>]) -> usize {
    match points.split_first() {
        None => 0,
        Some((p0, rest)) => row_rank(rest.iter().map(|p| vec_sub(p, p0)).collect()),
    }
}

// ---------------------------------------------------------------------------
// Bitsets (tight-row bookkeeping for the double description)
// ---------------------------------------------------------------------------

type Words = Vec<u64>;

fn bs_new(nbits: usize) -> Words {
    vec![0u64; nbits.div_ceil(64)]
}

fn bs_set(b: &mut Words, i: usize) {
    b[i / 64] |= 1u64 << (i % 64);
}

fn bs_and(a: &Words, b: &Words) -> Words {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn bs_subset(a: &Words, b: &Words) -> bool {
    a.iter().zip(b).all(|(x, y)| x & y == *x)
}

// ---------------------------------------------------------------------------
// Double description
// ---------------------------------------------------------------------------

/// Minimal generator description of a polyhedral cone `{y : A y >= 0}`:
/// a basis of its lineality space plus the extreme rays of the pointed
/// quotient.  Rays are scale-canonical (coprime integer entries).
struct ConeGenerators {
    lineality: Vec<Vec<Rat>>,
    rays: Vec<Vec<Rat>>,
}

struct DdRay {
    v: Vec<Rat>,
    tight: Words,
}

/// Incremental double description with explicit lineality handling.
///
/// Starts from the full space and intersects one halfspace `row · y >= 0`
/// at a time.  While the row cuts the lineality space, a pivot line is
/// split off and kept as a ray; afterwards the classical step combines
/// adjacent positive/negative ray pairs, with adjacency decided
/// combinatorially on tight-row sets.
fn cone_dd(dim: usize, rows: &[Vec<Rat>]) -> Result<ConeGenerators> {
    let nrows = rows.len();
    let mut lineality: Vec<Vec<Rat>> = (0..dim)
        .map(|i| {
            let mut e = vec![Rat::zero(); dim];
            e[i] = Rat::one();
            e
        })
        .collect();
    let mut rays: Vec<DdRay> = Vec::new();

    for (k, a) in rows.iter().enumerate() {
        if a.len() != dim {
            return Err(Error::structural(format!(
                "constraint row has {} entries, expected {dim}",
                a.len()
            )));
        }
        // Absorb the constraint into the lineality space if it cuts it.
        if let Some(i0) = lineality.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l0 = lineality.remove(i0);
            if dot(a, &l0).is_negative() {
                for x in l0.iter_mut() {
                    *x = -x.clone();
                }
            }
            let s = dot(a, &l0);
            for l in lineality.iter_mut() {
                let c = dot(a, l) / &s;
                if !c.is_zero() {
                    for (x, y) in l.iter_mut().zip(&l0) {
                        *x = &*x - &(&c * y);
                    }
                }
            }
            for r in rays.iter_mut() {
                let c = dot(a, &r.v) / &s;
                if !c.is_zero() {
                    for (x, y) in r.v.iter_mut().zip(&l0) {
                        *x = &*x - &(&c * y);
                    }
                    r.v = normalize_scale(&r.v);
                }
                bs_set(&mut r.tight, k);
            }
            let mut tight = bs_new(nrows);
            for j in 0..k {
                bs_set(&mut tight, j);
            }
            rays.push(DdRay {
                v: normalize_scale(&l0),
                tight,
            });
            continue;
        }

        // The row vanishes on the lineality space; split the rays.
        let vals: Vec<Rat> = rays.iter().map(|r| dot(a, &r.v)).collect();
        let has_neg = vals.iter().any(|v| v.is_negative());
        if !has_neg {
            for (r, v) in rays.iter_mut().zip(&vals) {
                if v.is_zero() {
                    bs_set(&mut r.tight, k);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut new_rays: Vec<DdRay> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let t = bs_and(&rays[p].tight, &rays[n].tight);
                let adjacent = !rays.iter().enumerate().any(|(i, r)| {
                    i != p && i != n && bs_subset(&t, &r.tight)
                });
                if !adjacent {
                    continue;
                }
                let (vp, vn) = (&vals[p], &vals[n]);
                let v: Vec<Rat> = rays[p]
                    .v
                    .iter()
                    .zip(&rays[n].v)
                    .map(|(xp, xn)| &(vp * xn) - &(vn * xp))
                    .collect();
                let mut tight = t;
                bs_set(&mut tight, k);
                new_rays.push(DdRay {
                    v: normalize_scale(&v),
                    tight,
                });
            }
        }
        let mut kept: Vec<DdRay> = Vec::new();
        for (i, r) in rays.into_iter().enumerate() {
            if vals[i].is_negative() {
                continue;
            }
            let mut r = r;
            if vals[i].is_zero() {
                bs_set(&mut r.tight, k);
            }
            kept.push(r);
        }
        kept.extend(new_rays);
        rays = kept;
    }

    let mut out_rays: Vec<Vec<Rat>> = rays.into_iter().map(|r| r.v).collect();
    out_rays.sort();
    out_rays.dedup();
    let lineality = lineality
        .into_iter()
        .map(|l| canonical_sign(normalize_scale(&l)))
        .collect();
    Ok(ConeGenerators {
        lineality,
        rays: out_rays,
    })
}

/// Outer description of the convex hull of a nonempty point set: affine-hull
/// equalities `normal · x = offset` plus facet inequalities
/// `normal · x <= offset`, both with coprime integer entries.
pub(crate) fn hull_from_vertices(
    dim: usize,
    points: &[Vec<Rat>],
) -> Result<(Vec<(Vec<Rat>, Rat)>, Vec<(Vec<Rat>, Rat)>)> {
    if points.is_empty() {
        return Err(Error::structural("hull of an empty point set"));
    }
    let rows: Vec<Vec<Rat>> = points
        .iter()
        .map(|p| {
            if p.len() != dim {
                return Err(Error::structural(format!(
                    "point has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            let mut row = Vec::with_capacity(dim + 1);
            row.push(Rat::one());
            row.extend(p.iter().map(|x| -x.clone()));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let cone = cone_dd(dim + 1, &rows)?;
    let mut equalities = Vec::new();
    for l in cone.lineality {
        let normal: Vec<Rat> = l[1..].to_vec();
        if normal.iter().all(|x| x.is_zero()) {
            continue;
        }
        equalities.push((normal, l[0].clone()));
    }
    let mut facets = Vec::new();
    for r in cone.rays {
        let normal: Vec<Rat> = r[1..].to_vec();
        if normal.iter().all(|x| x.is_zero()) {
            continue; // the trivial inequality 0 <= 1
        }
        facets.push((normal, r[0].clone()));
    }
    Ok((equalities, facets))
}

/// Vertices of the bounded polyhedron `{x : normal_i · x <= offset_i}`,
/// sorted lexicographically.  An unbounded input is rejected.
pub(crate) fn vertices_from_inequalities(
    dim: usize,
    ineqs: &[(Vec<Rat>, Rat)],
) -> Result<Vec<Vec<Rat>>> {
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(ineqs.len() + 1);
    for (a, b) in ineqs {
        if a.len() != dim {
            return Err(Error::structural(format!(
                "inequality normal has {} entries, expected {dim}",
                a.len()
            )));
        }
        let mut row = Vec::with_capacity(dim + 1);
        row.push(b.clone());
        row.extend(a.iter().map(|x| -x.clone()));
        rows.push(row);
    }
    let mut e0 = vec![Rat::zero(); dim + 1];
    e0[0] = Rat::one();
    rows.push(e0);
    let cone = cone_dd(dim + 1, &rows)?;
    if !cone.lineality.is_empty() {
        return Err(Error::domain(
            "vertex enumeration requires a bounded polyhedron (a line was found)",
        ));
    }
    let mut verts: Vec<Vec<Rat>> = Vec::new();
    for r in cone.rays {
        let t = &r[0];
        if t.is_zero() {
            return Err(Error::domain(
                "vertex enumeration requires a bounded polyhedron (a recession ray was found)",
            ));
        }
        verts.push(r[1..].iter().map(|x| x / t).collect());
    }
    verts.sort();
    verts.dedup();
    Ok(verts)
}

// ---------------------------------------------------------------------------
// Polytope type and JSON form
// ---------------------------------------------------------------------------

/// A convex polytope in `R^ambient_dim`, carried in either or both standard
/// representations.
///
/// Inequality entries `(normal, offset)` encode `normal · x <= offset`;
/// equalities appear as opposite inequality pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    /// Ambient dimension.
    pub ambient_dim: usize,
    /// Inequality description, if known.
    pub h_rep: Option<Vec<(Vec<Rat>, Rat)>>,
    /// Vertex description, if known.
    pub v_rep: Option<Vec<Vec<Rat>>>,
}

impl Polytope {
    /// Build from a vertex list (deduplicated and sorted).
    pub fn from_vertices(ambient_dim: usize, vertices: Vec<Vec<Rat>>) -> Result<Polytope> {
        for v in &vertices {
            if v.len() != ambient_dim {
                return Err(Error::structural(format!(
                    "vertex has {} coordinates, expected {ambient_dim}",
                    v.len()
                )));
            }
        }
        let mut vertices = vertices;
        vertices.sort();
        vertices.dedup();
        Ok(Polytope {
            ambient_dim,
            h_rep: None,
            v_rep: Some(vertices),
        })
    }

    /// Build from an inequality list.
    pub fn from_inequalities(
        ambient_dim: usize,
        ineqs: Vec<(Vec<Rat>, Rat)>,
    ) -> Result<Polytope> {
        for (a, _) in &ineqs {
            if a.len() != ambient_dim {
                return Err(Error::structural(format!(
                    "inequality normal has {} entries, expected {ambient_dim}",
                    a.len()
                )));
            }
        }
        Ok(Polytope {
            ambient_dim,
            h_rep: Some(ineqs),
            v_rep: None,
        })
    }

    /// Compute whichever representation is missing.
    ///
    /// Vertex-to-inequality conversion lists affine-hull equalities as
    /// opposite inequality pairs followed by the facets; inequality-to-vertex
    /// conversion requires a bounded input.
    pub fn complete(&mut self) -> Result<()> {
        match (&self.h_rep, &self.v_rep) {
            (None, None) => Err(Error::structural(
                "polytope carries neither representation",
            )),
            (Some(_), Some(_)) => Ok(()),
            (None, Some(verts)) => {
                let (eqs, facets) = hull_from_vertices(self.ambient_dim, verts)?;
                let mut h = Vec::new();
                for (n, c) in eqs {
                    h.push((n.iter().map(|x| -x.clone()).collect(), -c.clone()));
                    h.push((n, c));
                }
                h.extend(facets);
                self.h_rep = Some(h);
                Ok(())
            }
            (Some(ineqs), None) => {
                self.v_rep = Some(vertices_from_inequalities(self.ambient_dim, ineqs)?);
                Ok(())
            }
        }
    }

    /// Serialize to the exchange JSON form.
    pub fn to_json(&self) -> String {
        let dto = PolytopeDto {
            dim: self.ambient_dim,
            vertices: self
                .v_rep
                .as_ref()
                .map(|vs| vs.iter().map(|v| v.iter().map(format_rat).collect()).collect()),
            facets: self.h_rep.as_ref().map(|hs| {
                hs.iter()
                    .map(|(n, c)| FacetDto {
                        normal: n.iter().map(format_rat).collect(),
                        offset: format_rat(c),
                    })
                    .collect()
            }),
        };
        serde_json::to_string_pretty(&dto).expect("polytope serialization cannot fail")
    }

    /// Parse the exchange JSON form.
    pub fn from_json(s: &str) -> Result<Polytope> {
        let dto: PolytopeDto = serde_json::from_str(s)
            .map_err(|e| Error::structural(format!("malformed polytope JSON: {e}")))?;
        let v_rep = match dto.vertices {
            None => None,
            Some(vs) => {
                let mut out = Vec::with_capacity(vs.len());
                for v in vs {
                    if v.len() != dto.dim {
                        return Err(Error::structural(format!(
                            "vertex has {} coordinates, expected {}",
                            v.len(),
                            dto.dim
                        )));
                    }
                    out.push(v.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?);
                }
                Some(out)
            }
        };
        let h_rep = match dto.facets {
            None => None,
            Some(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for f in fs {
                    if f.normal.len() != dto.dim {
                        return Err(Error::structural(format!(
                            "facet normal has {} entries, expected {}",
                            f.normal.len(),
                            dto.dim
                        )));
                    }
                    let normal = f.normal.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?;
                    out.push((normal, parse_rat(&f.offset)?));
                }
                Some(out)
            }
        };
        Ok(Polytope {
            ambient_dim: dto.dim,
            h_rep,
            v_rep,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PolytopeDto {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    facets: Option<Vec<FacetDto>>,
}

#[derive(Serialize, Deserialize)]
struct FacetDto {
    normal: Vec<String>,
    offset: String,
}

// ---------------------------------------------------------------------------
// Facet verification
// ---------------------------------------------------------------------------

/// Verdict of [`verify_facet`].
#[derive(Debug, Clone, PartialEq)]
pub enum FacetCheck {
    /// Valid, and the supported face has dimension `dim(P) - 1`.
    Facet,
    /// Valid for every vertex but supporting a face of lower dimension
    /// (possibly empty, possibly the whole polytope).
    ValidNotFacet,
    /// Violated; a vertex strictly beyond the hyperplane is attached.
    Violated(Vec<Rat>),
}

/// Classify the inequality `normal · x <= offset` against a polytope's
/// vertex list.
pub fn verify_facet(p: &Polytope, normal: &[Rat], offset: &Rat) -> Result<FacetCheck> {
    let verts = p.v_rep.as_ref().ok_or_else(|| {
        Error::structural("facet verification requires the vertex representation")
    })?;
    if verts.is_empty() {
        return Err(Error::structural("facet verification against an empty vertex list"));
    }
    if normal.len() != p.ambient_dim {
        return Err(Error::structural(format!(
            "normal has {} entries, expected {}",
            normal.len(),
            p.ambient_dim
        )));
    }
    let mut tight: Vec<Vec<Rat>> = Vec::new();
    for v in verts {
        let s = dot(normal, v);
        if &s > offset {
            return Ok(FacetCheck::Violated(v.clone()));
        }
        if &s == offset {
            tight.push(v.clone());
        }
    }
    if tight.is_empty() {
        return Ok(FacetCheck::ValidNotFacet);
    }
    let pdim = affine_dim(verts);
    let fdim = affine_dim(&tight);
    if fdim + 1 == pdim && tight.len() < verts.len() {
        Ok(FacetCheck::Facet)
    } else {
        Ok(FacetCheck::ValidNotFacet)
    }
}

// ---------------------------------------------------------------------------
// Fourier–Motzkin elimination
// ---------------------------------------------------------------------------

/// Scale an inequality `(normal, offset)` by a positive factor to coprime
/// integer form.
fn normalize_ineq(normal: &[Rat], offset: &Rat) -> (Vec<Rat>, Rat) {
    let mut joint: Vec<Rat> = normal.to_vec();
    joint.push(offset.clone());
    let joint = normalize_scale(&joint);
    let offset = joint.last().expect("nonempty").clone();
    let normal = joint[..joint.len() - 1].to_vec();
    (normal, offset)
}

/// Eliminate the variable at index `var` from an inequality system (default
/// budget).  See [`fourier_motzkin_with_budget`].
pub fn fourier_motzkin(
    ineqs: &[(Vec<Rat>, Rat)],
    var: usize,
) -> Result<Vec<(Vec<Rat>, Rat)>> {
    fourier_motzkin_with_budget(ineqs, var, DEFAULT_BUDGET)
}

/// Eliminate the variable at index `var` from the system
/// `{x : normal_i · x <= offset_i}` by combining each positive-coefficient
/// row with each negative-coefficient row.  The eliminated column is removed,
/// so the output lives in one dimension less (indices above `var` shift down
/// by one).  Combined rows are brought to coprime integer form, exact
/// duplicates are dropped, and surviving rows are pruned by exact LP
/// redundancy tests.  A row reducing to `0 <= negative` is kept as an
/// infeasibility marker, and pruning is skipped entirely for infeasible
/// systems.  The budget caps the number of generated rows.
pub fn fourier_motzkin_with_budget(
    ineqs: &[(Vec<Rat>, Rat)],
    var: usize,
    budget: u64,
) -> Result<Vec<(Vec<Rat>, Rat)>> {
    let dim = match ineqs.first() {
        Some((a, _)) => a.len(),
        None => {
            return Err(Error::structural(
                "cannot eliminate a variable from an empty system",
            ))
        }
    };
    if var >= dim {
        return Err(Error::structural(format!(
            "eliminated variable {var} out of range for dimension {dim}"
        )));
    }
    for (a, _) in ineqs {
        if a.len() != dim {
            return Err(Error::structural(
                "inequality rows have inconsistent dimensions",
            ));
        }
    }
    let drop_col = |a: &[Rat]| -> Vec<Rat> {
        a.iter()
            .enumerate()
            .filter(|&(j, _)| j != var)
            .map(|(_, x)| x.clone())
            .collect()
    };
    let mut pos: Vec<usize> = Vec::new();
    let mut neg: Vec<usize> = Vec::new();
    let mut rows: BTreeSet<(Vec<Rat>, Rat)> = BTreeSet::new();
    for (i, (a, b)) in ineqs.iter().enumerate() {
        if a[var].is_positive() {
            pos.push(i);
        } else if a[var].is_negative() {
            neg.push(i);
        } else {
            rows.insert(normalize_ineq(&drop_col(a), b));
        }
    }
    let pairs = pos.len() as u64 * neg.len() as u64;
    if pairs + rows.len() as u64 > budget {
        return Err(Error::resource(format!(
            "elimination would generate {} rows, budget is {budget}",
            pairs + rows.len() as u64
        )));
    }
    for &p in &pos {
        for &n in &neg {
            let (ap, bp) = &ineqs[p];
            let (an, bn) = &ineqs[n];
            let cp = &ap[var];
            let cn = &an[var];
            // (-cn) * row_p + cp * row_n, both multipliers positive.
            let normal: Vec<Rat> = ap
                .iter()
                .zip(an)
                .enumerate()
                .filter(|&(j, _)| j != var)
                .map(|(_, (xp, xn))| &(-cn * xp) + &(cp * xn))
                .collect();
            let offset = &(-cn * bp) + &(cp * bn);
            rows.insert(normalize_ineq(&normal, &offset));
        }
    }
    let rows: Vec<(Vec<Rat>, Rat)> = rows.into_iter().collect();

    // An all-zero row `0 <= b` is trivially true for b >= 0 and marks an
    // infeasible system otherwise.
    let infeasible = rows
        .iter()
        .any(|(a, b)| a.iter().all(|x| x.is_zero()) && b.is_negative());
    if infeasible {
        return Ok(rows
            .into_iter()
            .filter(|(a, b)| !(a.iter().all(|x| x.is_zero()) && !b.is_negative()))
            .collect());
    }

    let mut alive: Vec<bool> = vec![true; rows.len()];
    for i in 0..rows.len() {
        let (ai, bi) = &rows[i];
        if ai.iter().all(|x| x.is_zero()) {
            alive[i] = false; // 0 <= nonnegative: trivially true
            continue;
        }
        let mut lp = LinearProgram::new(dim - 1);
        lp.variable_bounds = vec![VarBound::Free; dim - 1];
        lp.objective = ai.clone();
        for (j, (aj, bj)) in rows.iter().enumerate() {
            if j == i || !alive[j] {
                continue;
            }
            let entries: Vec<(usize, Rat)> = aj
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(c, x)| (c, -x.clone()))
                .collect();
            lp.add_row(RowKind::GreaterEqual, entries, -bj.clone());
        }
        let cert = solve(&lp)?;
        match cert.kind {
            CertificateKind::Optimal => {
                let value = cert.objective_value.expect("optimal verdicts carry a value");
                if &value <= bi {
                    alive[i] = false;
                }
            }
            _ => {} // unbounded (or degenerate): the row does cut something
        }
    }
    Ok(rows
        .into_iter()
        .zip(alive)
        .filter(|(_, keep)| *keep)
        .map(|(r, _)| r)
        .collect())
}

// ---------------------------------------------------------------------------
// Symmetry groups and vertex quotients
// ---------------------------------------------------------------------------

/// A finite group of coordinate permutations, stored eagerly as its full
/// element list (identity included), in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryGroup {
    dim: usize,
    elements: Vec<Vec<usize>>,
}

/// Push a vector forward along a coordinate permutation:
/// `out[perm[i]] = v[i]`.
pub fn apply_permutation(perm: &[usize], v: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); v.len()];
    for (i, x) in v.iter().enumerate() {
        out[perm[i]] = x.clone();
    }
    out
}

impl SymmetryGroup {
    /// Close a generator list under composition.  Generators must be
    /// permutations of `0..dim`.
    pub fn new(dim: usize, generators: Vec<Vec<usize>>) -> Result<SymmetryGroup> {
        for g in &generators {
            if g.len() != dim {
                return Err(Error::domain(format!(
                    "generator has {} entries, expected {dim}",
                    g.len()
                )));
            }
            let mut seen = vec![false; dim];
            for &i in g {
                if i >= dim || seen[i] {
                    return Err(Error::domain(
                        "generator is not a permutation of the coordinate set",
                    ));
                }
                seen[i] = true;
            }
        }
        let identity: Vec<usize> = (0..dim).collect();
        let mut elements: BTreeSet<Vec<usize>> = BTreeSet::new();
        elements.insert(identity.clone());
        let mut frontier = vec![identity];
        while let Some(e) = frontier.pop() {
            for g in &generators {
                let composed: Vec<usize> = e.iter().map(|&i| g[i]).collect();
                if elements.insert(composed.clone()) {
                    if elements.len() > 1_000_000 {
                        return Err(Error::resource(
                            "symmetry group closure exceeds one million elements",
                        ));
                    }
                    frontier.push(composed);
                }
            }
        }
        Ok(SymmetryGroup {
            dim,
            elements: elements.into_iter().collect(),
        })
    }

    /// The one-element group on `dim` coordinates.
    pub fn trivial(dim: usize) -> SymmetryGroup {
        SymmetryGroup {
            dim,
            elements: vec![(0..dim).collect()],
        }
    }

    /// Ambient dimension acted upon.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Group order.
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// All elements, identity included, in sorted order.
    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    /// The lexicographically least image of `v` under the group.
    pub fn canonical_form(&self, v: &[Rat]) -> Vec<Rat> {
        self.elements
            .iter()
            .map(|e| apply_permutation(e, v))
            .min()
            .expect("groups are nonempty")
    }
}

/// One orbit of a polytope's vertex set under a symmetry group.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexClass {
    /// Lexicographically least orbit element.
    pub representative: Vec<Rat>,
    /// Orbit members present in the vertex list, sorted.
    pub members: Vec<Vec<Rat>>,
}

/// Partition a polytope's vertices into orbits under `group`.  Classes are
/// returned sorted by representative, so the result does not depend on the
/// stored vertex order.
pub fn quotient_classes(p: &Polytope, group: &SymmetryGroup) -> Result<Vec<VertexClass>> {
    let verts = p.v_rep.as_ref().ok_or_else(|| {
        Error::structural("vertex quotients require the vertex representation")
    })?;
    if group.dim() != p.ambient_dim {
        return Err(Error::structural(format!(
            "group acts on {} coordinates but the polytope has {}",
            group.dim(),
            p.ambient_dim
        )));
    }
    let mut classes: BTreeMap<Vec<Rat>, BTreeSet<Vec<Rat>>> = BTreeMap::new();
    for v in verts {
        classes
            .entry(group.canonical_form(v))
            .or_default()
            .insert(v.clone());
    }
    Ok(classes
        .into_iter()
        .map(|(representative, members)| VertexClass {
            representative,
            members: members.into_iter().collect(),
        })
        .collect())
}

/// The four pair directions, used to label marginal blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    H,
    V,
    Plus,
    Minus,
}

fn dir_of(region: &Region) -> Option<Dir> {
    if *region == Region::pair_h() {
        Some(Dir::H)
    } else if *region == Region::pair_v() {
        Some(Dir::V)
    } else if *region == Region::pair_plus() {
        Some(Dir::Plus)
    } else if *region == Region::pair_minus() {
        Some(Dir::Minus)
    } else {
        None
    }
}

/// The symmetry group of a family of pair-marginal blocks: outcome
/// relabellings together with those lattice reflections and the quarter-turn
/// rotation that map the chosen direction set onto itself.
///
/// Coordinates are indexed `block * d^2 + a * d + b`, where `a` is the value
/// at the origin of the pair (for the vertical pair: at the upper site) and
/// blocks follow the order of `targets`.  The quarter turn is included only
/// when it permutes the direction set (it swaps horizontal with vertical and
/// the two diagonals), and likewise for the reflections; without the quarter
/// turn the two diagonal directions never mix with the axes, which leaves a
/// strictly finer partition.
pub fn marginal_symmetry_group(d: usize, targets: &[Region]) -> Result<SymmetryGroup> {
    check_dimension(d)?;
    let dirs: Vec<Dir> = targets
        .iter()
        .map(|r| {
            dir_of(r).ok_or_else(|| {
                Error::domain(
                    "marginal symmetries are defined for nearest and next-nearest pair regions",
                )
            })
        })
        .collect::<Result<_>>()?;
    for (i, a) in dirs.iter().enumerate() {
        if dirs[..i].contains(a) {
            return Err(Error::domain("duplicate pair region in target list"));
        }
    }
    let dim = targets.len() * d * d;
    let pos = |dir: Dir| dirs.iter().position(|&g| g == dir);
    let idx = |block: usize, a: usize, b: usize| block * d * d + a * d + b;

    let mut generators: Vec<Vec<usize>> = Vec::new();

    // Outcome relabellings: a transposition plus, for d > 2, a full cycle.
    let mut outcome_maps: Vec<Vec<usize>> = Vec::new();
    let mut swap01: Vec<usize> = (0..d).collect();
    swap01.swap(0, 1);
    outcome_maps.push(swap01);
    if d > 2 {
        outcome_maps.push((0..d).map(|i| (i + 1) % d).collect());
    }
    for tau in outcome_maps {
        let mut sigma = vec![0usize; dim];
        for block in 0..targets.len() {
            for a in 0..d {
                for b in 0..d {
                    sigma[idx(block, a, b)] = idx(block, tau[a], tau[b]);
                }
            }
        }
        generators.push(sigma);
    }

    // Lattice transforms, each given as (source, target, transposed) rules.
    let transforms: [&[(Dir, Dir, bool)]; 3] = [
        // Reflection across the horizontal axis.
        &[
            (Dir::H, Dir::H, false),
            (Dir::V, Dir::V, true),
            (Dir::Minus, Dir::Plus, false),
            (Dir::Plus, Dir::Minus, false),
        ],
        // Reflection across the vertical axis.
        &[
            (Dir::H, Dir::H, true),
            (Dir::V, Dir::V, false),
            (Dir::Minus, Dir::Plus, true),
            (Dir::Plus, Dir::Minus, true),
        ],
        // Counterclockwise quarter turn.
        &[
            (Dir::V, Dir::H, false),
            (Dir::H, Dir::V, true),
            (Dir::Minus, Dir::Plus, false),
            (Dir::Plus, Dir::Minus, true),
        ],
    ];
    for rules in transforms {
        let applicable: Vec<&(Dir, Dir, bool)> = rules
            .iter()
            .filter(|(src, _, _)| pos(*src).is_some())
            .collect();
        if !applicable.iter().all(|(_, tgt, _)| pos(*tgt).is_some()) {
            continue;
        }
        let mut sigma = vec![0usize; dim];
        for (src, tgt, transposed) in applicable {
            let sb = pos(*src).expect("filtered above");
            let tb = pos(*tgt).expect("checked above");
            for a in 0..d {
                for b in 0..d {
                    sigma[idx(sb, a, b)] = if *transposed {
                        idx(tb, b, a)
                    } else {
                        idx(tb, a, b)
                    };
                }
            }
        }
        generators.push(sigma);
    }

    SymmetryGroup::new(dim, generators)
}

// ---------------------------------------------------------------------------
// Exact projection of the translation-invariant strip
// ---------------------------------------------------------------------------

/// Coordinate order of one marginal block: pair regions containing the
/// origin are keyed origin-first, so pair blocks read as tables `P(a, b)`
/// with `a` the value at the origin; all other regions use canonical site
/// order.
pub fn block_site_order(region: &Region) -> Vec<(i64, i64)> {
    let sites = region.sites();
    if sites.len() == 2 && region.contains((0, 0)) {
        let other = *sites.iter().find(|&&s| s != (0, 0)).expect("two sites");
        vec![(0, 0), other]
    } else {
        sites.to_vec()
    }
}

/// The result of an exact strip projection: the projected polytope with both
/// representations, one separating objective per vertex, and the coordinate
/// offset of each target block.
#[derive(Debug, Clone)]
pub struct ProjectedPolytope {
    /// The projection, with vertices and inequalities filled in.
    pub polytope: Polytope,
    /// For each vertex (index-aligned with `polytope.v_rep`): an objective
    /// over the ambient coordinates whose unique maximizer over the
    /// projection is that vertex.
    pub probes: Vec<Vec<Rat>>,
    /// Starting coordinate of each target block, in target order.
    pub block_offsets: Vec<usize>,
}

/// Exact projection of the `rect(n, t)` translation-invariant strip for
/// `d` outcomes onto the joint distributions of the target regions
/// (seed 0, default budget).  See [`project_lti_seeded`].
pub fn project_lti(d: usize, strip: (usize, usize), targets: &[Region]) -> Result<Polytope> {
    Ok(project_lti_seeded(d, strip, targets, 0, DEFAULT_BUDGET)?.polytope)
}

/// Exact projection of the translation-invariant strip onto marginal
/// coordinate blocks.
///
/// The strip feasibility program is the exact one used by the hierarchy
/// (nonnegativity, total probability, and the two one-step shift
/// equalities); each target region is embedded at the minimum corner of the
/// strip, which loses nothing by translation invariance.  Vertices are found
/// by maximizing seeded small-integer objectives, sharpened
/// lexicographically so every reported point is a true vertex of the
/// projection; candidate facets of the running hull are then re-maximized
/// over the strip, and any violation contributes a new vertex.  The loop
/// ends only when every facet and affine-hull equality of the hull is
/// confirmed exactly, so termination is by exactness, not by iteration caps.
pub fn project_lti_seeded(
    d: usize,
    strip: (usize, usize),
    targets: &[Region],
    seed: u64,
    budget: u64,
) -> Result<ProjectedPolytope> {
    let (n, t) = strip;
    if targets.is_empty() {
        return Err(Error::structural("projection requires at least one target region"));
    }
    let base = lti_strip_lp(d, n, t, budget)?;
    let nvars = base.num_vars();
    let nsites = n * t;

    // Block structure: per-target site order, strip positions, and fibers
    // (the strip configurations lying over each block configuration).
    let mut block_offsets: Vec<usize> = Vec::with_capacity(targets.len());
    let mut fibers: Vec<Vec<Vec<usize>>> = Vec::with_capacity(targets.len());
    let mut ambient = 0usize;
    let mut positions_per_target: Vec<Vec<usize>> = Vec::with_capacity(targets.len());
    for region in targets {
        let (x0, x1, y0, y1) = region.bounding_box();
        if (x1 - x0) as usize >= n || (y1 - y0) as usize >= t {
            return Err(Error::domain(format!(
                "target region does not fit in the {n} x {t} strip"
            )));
        }
        let order = block_site_order(region);
        let positions: Vec<usize> = order
            .iter()
            .map(|&(x, y)| ((y - y0) as usize) * n + ((x - x0) as usize))
            .collect();
        let block = config_count(d, region.len())? as usize;
        block_offsets.push(ambient);
        ambient += block;
        positions_per_target.push(positions);
        fibers.push(vec![Vec::new(); block]);
    }
    let mut digits = vec![0u8; nsites];
    for k in 0..nvars {
        decode_into(k as u64, d, &mut digits);
        for (g, positions) in positions_per_target.iter().enumerate() {
            let cfg = key_at(&digits, positions, d) as usize;
            fibers[g][cfg].push(k);
        }
    }
    let flat_fibers: Vec<&Vec<usize>> = fibers.iter().flatten().collect();

    let objective_of = |w: &[Rat]| -> Vec<Rat> {
        let mut obj = vec![Rat::zero(); nvars];
        for (j, wj) in w.iter().enumerate() {
            if !wj.is_zero() {
                for &k in flat_fibers[j] {
                    obj[k] = &obj[k] + wj;
                }
            }
        }
        obj
    };
    let sparse = |v: &[Rat]| -> Vec<(usize, Rat)> {
        v.iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(c, x)| (c, x.clone()))
            .collect()
    };

    // Exact maximum of an ambient objective over the projection.
    let max_value = |w: &[Rat]| -> Result<Rat> {
        let mut lp = base.clone();
        lp.objective = objective_of(w);
        let cert = solve(&lp)?;
        cert.objective_value
            .ok_or_else(|| Error::structural("strip maximization did not return optimal"))
    };

    // Lexicographic sharpening: maximize `w`, then within the optimal face
    // maximize each ambient coordinate in turn.  The outcome is the unique
    // lex-greatest point of the optimal face, hence a vertex of the
    // projection.
    let lex_vertex = |w: &[Rat]| -> Result<Vec<Rat>> {
        let mut lp = base.clone();
        lp.objective = objective_of(w);
        let first = solve(&lp)?;
        let v0 = first
            .objective_value
            .ok_or_else(|| Error::structural("strip maximization did not return optimal"))?;
        lp.add_row(RowKind::Equality, sparse(&lp.objective.clone()), v0);
        let mut point = Vec::with_capacity(ambient);
        for j in 0..ambient {
            let indicator: Vec<Rat> = (0..ambient)
                .map(|c| if c == j { Rat::one() } else { Rat::zero() })
                .collect();
            lp.objective = objective_of(&indicator);
            let cert = solve(&lp)?;
            let value = cert
                .objective_value
                .ok_or_else(|| Error::structural("strip maximization did not return optimal"))?;
            lp.add_row(RowKind::Equality, sparse(&lp.objective.clone()), value.clone());
            point.push(value);
        }
        Ok(point)
    };

    let mut vertices: BTreeSet<Vec<Rat>> = BTreeSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial_probes = 2 * ambient + 8;
    for _ in 0..initial_probes {
        let w: Vec<Rat> = (0..ambient)
            .map(|_| Rat::from_integer(BigInt::from(rng.random_range(-9i64..=9))))
            .collect();
        vertices.insert(lex_vertex(&w)?);
    }

    let equalities;
    let facets;
    loop {
        let pts: Vec<Vec<Rat>> = vertices.iter().cloned().collect();
        let (eqs, fts) = hull_from_vertices(ambient, &pts)?;
        let mut added = false;
        for (normal, offset) in &fts {
            if max_value(normal)? > *offset {
                vertices.insert(lex_vertex(normal)?);
                added = true;
            }
        }
        for (normal, offset) in &eqs {
            if max_value(normal)? > *offset {
                vertices.insert(lex_vertex(normal)?);
                added = true;
            }
            let negated: Vec<Rat> = normal.iter().map(|x| -x.clone()).collect();
            if max_value(&negated)? > -offset.clone() {
                vertices.insert(lex_vertex(&negated)?);
                added = true;
            }
        }
        if !added {
            equalities = eqs;
            facets = fts;
            break;
        }
    }

    let verts: Vec<Vec<Rat>> = vertices.into_iter().collect();

    // One separating objective per vertex: a linear functional strictly
    // maximized (over the projection) at that vertex alone.
    let mut probes: Vec<Vec<Rat>> = Vec::with_capacity(verts.len());
    for (i, v) in verts.iter().enumerate() {
        if verts.len() == 1 {
            probes.push(vec![Rat::zero(); ambient]);
            break;
        }
        let mut lp = LinearProgram::new(ambient);
        lp.variable_bounds = vec![VarBound::Free; ambient];
        for (j, w) in verts.iter().enumerate() {
            if j == i {
                continue;
            }
            let entries: Vec<(usize, Rat)> = (0..ambient)
                .map(|c| (c, &v[c] - &w[c]))
                .filter(|(_, x)| !x.is_zero())
                .collect();
            lp.add_row(RowKind::GreaterEqual, entries, Rat::one());
        }
        let cert = solve_feasibility(&lp)?;
        let u = cert.primal_point.ok_or_else(|| {
            Error::structural("internal: a projected point is not extreme")
        })?;
        probes.push(normalize_scale(&u));
    }

    let mut h = Vec::new();
    for (normal, offset) in equalities {
        h.push((normal.iter().map(|x| -x.clone()).collect(), -offset.clone()));
        h.push((normal, offset));
    }
    h.extend(facets);

    Ok(ProjectedPolytope {
        polytope: Polytope {
            ambient_dim: ambient,
            h_rep: Some(h),
            v_rep: Some(verts),
        },
        probes,
        block_offsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn r(n: i64) -> Rat {
        rat_int(n)
    }

    fn rv(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| r(x)).collect()
    }

    #[test]
    fn normalization_produces_coprime_integers() {
        let v = vec![rat(2, 3), rat(-4, 3), rat(0, 1)];
        assert_eq!(normalize_scale(&v), rv(&[1, -2, 0]));
        let z = vec![Rat::zero(), Rat::zero()];
        assert_eq!(normalize_scale(&z), z);
    }

    #[test]
    fn rank_of_simple_matrices() {
        assert_eq!(row_rank(vec![rv(&[1, 0]), rv(&[0, 1])]), 2);
        assert_eq!(row_rank(vec![rv(&[1, 2]), rv(&[2, 4])]), 1);
        assert_eq!(row_rank(vec![rv(&[0, 0])]), 0);
    }

    #[test]
    fn hull_of_triangle_has_three_facets_and_no_equalities() {
        let pts = vec![rv(&[0, 0]), rv(&[1, 0]), rv(&[0, 1])];
        let (eqs, facets) = hull_from_vertices(2, &pts).unwrap();
        assert!(eqs.is_empty());
        let mut got: Vec<(Vec<Rat>, Rat)> = facets;
        got.sort();
        let mut want = vec![
            (rv(&[-1, 0]), r(0)),
            (rv(&[0, -1]), r(0)),
            (rv(&[1, 1]), r(1)),
        ];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn hull_of_a_segment_reports_the_affine_hull() {
        let pts = vec![rv(&[0, 0]), rv(&[1, 1])];
        let (eqs, facets) = hull_from_vertices(2, &pts).unwrap();
        assert_eq!(eqs.len(), 1);
        let (n, c) = &eqs[0];
        // The hull lies on x - y = 0 (up to canonical sign).
        assert_eq!(n, &rv(&[1, -1]));
        assert_eq!(c, &r(0));
        assert_eq!(facets.len(), 2);
        // Each endpoint facet supports exactly one of the two points.
        for (normal, offset) in &facets {
            let tight: Vec<_> = pts.iter().filter(|p| &dot(normal, p) == offset).collect();
            assert_eq!(tight.len(), 1);
            assert!(pts.iter().all(|p| dot(normal, p) <= *offset));
        }
    }

    #[test]
    fn hull_of_a_point_is_all_equalities() {
        let pts = vec![rv(&[3, 4])];
        let (eqs, facets) = hull_from_vertices(2, &pts).unwrap();
        assert_eq!(eqs.len(), 2);
        assert!(facets.is_empty());
        for (n, c) in &eqs {
            assert_eq!(dot(n, &pts[0]), *c);
        }
    }

    #[test]
    fn vertices_of_the_unit_square() {
        let ineqs = vec![
            (rv(&[1, 0]), r(1)),
            (rv(&[-1, 0]), r(0)),
            (rv(&[0, 1]), r(1)),
            (rv(&[0, -1]), r(0)),
        ];
        let verts = vertices_from_inequalities(2, &ineqs).unwrap();
        assert_eq!(
            verts,
            vec![rv(&[0, 0]), rv(&[0, 1]), rv(&[1, 0]), rv(&[1, 1])]
        );
    }

    #[test]
    fn vertex_enumeration_rejects_unbounded_input() {
        let ineqs = vec![(rv(&[-1, 0]), r(0)), (rv(&[0, -1]), r(0))];
        assert!(vertices_from_inequalities(2, &ineqs).is_err());
    }

    #[test]
    fn vertex_enumeration_of_an_infeasible_system_is_empty() {
        let ineqs = vec![(rv(&[1]), r(-1)), (rv(&[-1]), r(0))];
        let verts = vertices_from_inequalities(1, &ineqs).unwrap();
        assert!(verts.is_empty());
    }

    #[test]
    fn round_trip_square_through_both_representations() {
        let mut p = Polytope::from_vertices(
            2,
            vec![rv(&[0, 0]), rv(&[1, 0]), rv(&[0, 1]), rv(&[1, 1])],
        )
        .unwrap();
        p.complete().unwrap();
        let h = p.h_rep.clone().unwrap();
        assert_eq!(h.len(), 4);
        let verts = vertices_from_inequalities(2, &h).unwrap();
        assert_eq!(verts, p.v_rep.unwrap());
    }

    #[test]
    fn polytope_json_round_trip() {
        let mut p = Polytope::from_vertices(2, vec![rv(&[0, 0]), rv(&[1, 0]), rv(&[0, 1])]).unwrap();
        p.complete().unwrap();
        let s = p.to_json();
        assert!(s.contains("\"dim\""));
        let q = Polytope::from_json(&s).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn eliminating_from_the_triangle_gives_an_interval() {
        // x + y <= 1, x >= 0, y >= 0; eliminating y leaves 0 <= x <= 1.
        let ineqs = vec![
            (rv(&[1, 1]), r(1)),
            (rv(&[-1, 0]), r(0)),
            (rv(&[0, -1]), r(0)),
        ];
        let out = fourier_motzkin(&ineqs, 1).unwrap();
        let mut got = out;
        got.sort();
        assert_eq!(got, vec![(rv(&[-1]), r(0)), (rv(&[1]), r(1))]);
    }

    #[test]
    fn eliminating_from_the_simplex_gives_the_lower_simplex() {
        let ineqs = vec![
            (rv(&[1, 1, 1]), r(1)),
            (rv(&[-1, 0, 0]), r(0)),
            (rv(&[0, -1, 0]), r(0)),
            (rv(&[0, 0, -1]), r(0)),
        ];
        let out = fourier_motzkin(&ineqs, 2).unwrap();
        let mut got = out;
        got.sort();
        assert_eq!(
            got,
            vec![
                (rv(&[-1, 0]), r(0)),
                (rv(&[0, -1]), r(0)),
                (rv(&[1, 1]), r(1)),
            ]
        );
    }

    #[test]
    fn elimination_keeps_an_infeasibility_marker() {
        // x <= -1 and -x <= 0 are jointly infeasible.
        let ineqs = vec![(rv(&[1]), r(-1)), (rv(&[-1]), r(0))];
        let out = fourier_motzkin(&ineqs, 0).unwrap();
        assert_eq!(out, vec![(Vec::<Rat>::new(), r(-1))]);
    }

    #[test]
    fn elimination_prunes_redundant_rows() {
        // x + y <= 1, x - y <= 1, y >= 0, x >= 0: eliminating y yields x <= 1
        // twice plus x >= 0; duplicates and dominated rows must collapse.
        let ineqs = vec![
            (rv(&[1, 1]), r(1)),
            (rv(&[1, -1]), r(1)),
            (rv(&[0, -1]), r(0)),
            (rv(&[-1, 0]), r(0)),
        ];
        let mut got = fourier_motzkin(&ineqs, 1).unwrap();
        got.sort();
        assert_eq!(got, vec![(rv(&[-1]), r(0)), (rv(&[1]), r(1))]);
    }

    #[test]
    fn facet_classification_on_the_triangle() {
        let mut p =
            Polytope::from_vertices(2, vec![rv(&[0, 0]), rv(&[1, 0]), rv(&[0, 1])]).unwrap();
        p.complete().unwrap();
        assert_eq!(verify_facet(&p, &rv(&[-1, 0]), &r(0)).unwrap(), FacetCheck::Facet);
        assert_eq!(verify_facet(&p, &rv(&[1, 1]), &r(1)).unwrap(), FacetCheck::Facet);
        // Tight only at a single vertex: valid but a 0-dimensional face.
        assert_eq!(
            verify_facet(&p, &rv(&[1, 0]), &r(1)).unwrap(),
            FacetCheck::ValidNotFacet
        );
        // Slack everywhere.
        assert_eq!(
            verify_facet(&p, &rv(&[1, 1]), &r(2)).unwrap(),
            FacetCheck::ValidNotFacet
        );
        match verify_facet(&p, &rv(&[-1, -1]), &r(-1)).unwrap() {
            FacetCheck::Violated(w) => assert!(dot(&rv(&[-1, -1]), &w) > r(-1)),
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn symmetry_groups_close_and_validate() {
        let swap = vec![1usize, 0];
        let g = SymmetryGroup::new(2, vec![swap]).unwrap();
        assert_eq!(g.order(), 2);
        let s3 = SymmetryGroup::new(3, vec![vec![1, 0, 2], vec![1, 2, 0]]).unwrap();
        assert_eq!(s3.order(), 6);
        assert!(SymmetryGroup::new(2, vec![vec![0, 0]]).is_err());
        assert!(SymmetryGroup::new(2, vec![vec![0]]).is_err());
    }

    #[test]
    fn quotients_respect_the_group_and_ignore_vertex_order() {
        let verts = vec![rv(&[1, 0]), rv(&[0, 1])];
        let p = Polytope::from_vertices(2, verts.clone()).unwrap();
        let swap = SymmetryGroup::new(2, vec![vec![1, 0]]).unwrap();
        let classes = quotient_classes(&p, &swap).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].representative, rv(&[0, 1]));
        assert_eq!(classes[0].members.len(), 2);

        let trivial = SymmetryGroup::trivial(2);
        let classes = quotient_classes(&p, &trivial).unwrap();
        assert_eq!(classes.len(), 2);

        let p_rev = Polytope::from_vertices(2, verts.into_iter().rev().collect()).unwrap();
        assert_eq!(
            quotient_classes(&p_rev, &swap).unwrap(),
            quotient_classes(&p, &swap).unwrap()
        );
    }

    #[test]
    fn pair_block_symmetries_have_the_expected_orders() {
        // Two outcomes, all four directions: outcome swap (order 2) times
        // the dihedral group of the square (order 8).
        let targets = [
            Region::pair_h(),
            Region::pair_v(),
            Region::pair_plus(),
            Region::pair_minus(),
        ];
        let g = marginal_symmetry_group(2, &targets).unwrap();
        assert_eq!(g.order(), 16);
        // Horizontal pairs alone admit no quarter turn.
        let g = marginal_symmetry_group(2, &[Region::pair_h()]).unwrap();
        assert_eq!(g.order(), 4);
        // Three outcomes, axes only.
        let g = marginal_symmetry_group(3, &[Region::pair_h(), Region::pair_v()]).unwrap();
        assert_eq!(g.order(), 48);
        assert!(marginal_symmetry_group(2, &[Region::rect(2, 2).unwrap()]).is_err());
    }

    #[test]
    fn pair_blocks_are_keyed_origin_first() {
        assert_eq!(block_site_order(&Region::pair_h()), vec![(0, 0), (1, 0)]);
        assert_eq!(block_site_order(&Region::pair_v()), vec![(0, 0), (0, -1)]);
        assert_eq!(block_site_order(&Region::pair_plus()), vec![(0, 0), (1, 1)]);
        assert_eq!(block_site_order(&Region::pair_minus()), vec![(0, 0), (1, -1)]);
    }

    /// Check that a projection vertex is realized by an actual strip
    /// distribution: fix the marginal coordinates and solve for feasibility.
    fn assert_strip_realizable(
        d: usize,
        strip: (usize, usize),
        targets: &[Region],
        proj: &ProjectedPolytope,
        vertex: &[Rat],
    ) {
        let (n, t) = strip;
        let mut lp = lti_strip_lp(d, n, t, DEFAULT_BUDGET).unwrap();
        let nsites = n * t;
        let mut digits = vec![0u8; nsites];
        for (g, region) in targets.iter().enumerate() {
            let (x0, _, y0, _) = region.bounding_box();
            let order = block_site_order(region);
            let positions: Vec<usize> = order
                .iter()
                .map(|&(x, y)| ((y - y0) as usize) * n + ((x - x0) as usize))
                .collect();
            let block = config_count(d, region.len()).unwrap() as usize;
            for cfg in 0..block {
                let mut entries: Vec<(usize, Rat)> = Vec::new();
                for k in 0..lp.num_vars() {
                    decode_into(k as u64, d, &mut digits);
                    if key_at(&digits, &positions, d) as usize == cfg {
                        entries.push((k, Rat::one()));
                    }
                }
                let target = vertex[proj.block_offsets[g] + cfg].clone();
                lp.add_row(RowKind::Equality, entries, target);
            }
        }
        let cert = solve_feasibility(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Feasible);
    }

    #[test]
    fn horizontal_projection_of_the_two_by_one_strip() {
        // Two outcomes on a 2 x 1 strip projected onto the horizontal pair:
        // the two constant points and the even mixture of the alternations.
        let targets = [Region::pair_h()];
        let proj = project_lti_seeded(2, (2, 1), &targets, 0, DEFAULT_BUDGET).unwrap();
        let verts = proj.polytope.v_rep.clone().unwrap();
        let mut want = vec![
            rv(&[1, 0, 0, 0]),
            rv(&[0, 0, 0, 1]),
            vec![r(0), rat(1, 2), rat(1, 2), r(0)],
        ];
        want.sort();
        assert_eq!(verts, want);
        for v in &verts {
            assert_strip_realizable(2, (2, 1), &targets, &proj, v);
        }
        // Each stored probe is strictly maximized at its own vertex.
        for (i, v) in verts.iter().enumerate() {
            for (j, w) in verts.iter().enumerate() {
                if i != j {
                    assert!(dot(&proj.probes[i], v) > dot(&proj.probes[i], w));
                }
            }
        }
    }

    #[test]
    fn elimination_agrees_with_the_probe_projection() {
        // Same instance as above, computed by Fourier-Motzkin: variables are
        // the four strip configuration probabilities followed by the four
        // marginal coordinates; eliminating the strip variables must leave
        // exactly the projection.
        let d = 2;
        let (n, t) = (2usize, 1usize);
        let targets = [Region::pair_h()];
        let base = lti_strip_lp(d, n, t, DEFAULT_BUDGET).unwrap();
        let nx = base.num_vars();
        let ambient = 4usize;
        let dim = nx + ambient;

        let mut ineqs: Vec<(Vec<Rat>, Rat)> = Vec::new();
        // LP rows (equalities become opposite pairs; all rows touch x only).
        for i in 0..base.num_rows() {
            let mut row = vec![Rat::zero(); dim];
            for (c, v) in &base.constraint_matrix[i] {
                row[*c] = v.clone();
            }
            let b = base.rhs[i].clone();
            match base.row_kinds[i] {
                RowKind::Equality => {
                    ineqs.push((row.iter().map(|x| -x.clone()).collect(), -b.clone()));
                    ineqs.push((row, b));
                }
                RowKind::GreaterEqual => {
                    ineqs.push((row.iter().map(|x| -x.clone()).collect(), -b));
                }
            }
        }
        // Nonnegativity of the strip variables.
        for k in 0..nx {
            let mut row = vec![Rat::zero(); dim];
            row[k] = -Rat::one();
            ineqs.push((row, Rat::zero()));
        }
        // Marginal definitions y = sum of fiber, as opposite pairs.
        let region = &targets[0];
        let (x0, _, y0, _) = region.bounding_box();
        let order = block_site_order(region);
        let positions: Vec<usize> = order
            .iter()
            .map(|&(x, y)| ((y - y0) as usize) * n + ((x - x0) as usize))
            .collect();
        let mut digits = vec![0u8; n * t];
        for cfg in 0..ambient {
            let mut row = vec![Rat::zero(); dim];
            for k in 0..nx {
                decode_into(k as u64, d, &mut digits);
                if key_at(&digits, &positions, d) as usize == cfg {
                    row[k] = Rat::one();
                }
            }
            row[nx + cfg] = -Rat::one();
            ineqs.push((row.clone(), Rat::zero()));
            ineqs.push((row.iter().map(|x| -x.clone()).collect(), Rat::zero()));
        }

        for _ in 0..nx {
            ineqs = fourier_motzkin(&ineqs, 0).unwrap();
        }
        let verts = vertices_from_inequalities(ambient, &ineqs).unwrap();
        let proj = project_lti(d, (n, t), &targets).unwrap();
        assert_eq!(verts, proj.v_rep.unwrap());
    }

    #[test]
    fn full_pair_projection_of_the_two_by_two_strip_has_thirteen_vertices() {
        let targets = [
            Region::pair_h(),
            Region::pair_v(),
            Region::pair_plus(),
            Region::pair_minus(),
        ];
        let proj = project_lti_seeded(2, (2, 2), &targets, 0, DEFAULT_BUDGET).unwrap();
        let verts = proj.polytope.v_rep.clone().unwrap();
        assert_eq!(verts.len(), 13);
        assert_eq!(proj.polytope.ambient_dim, 16);
        // Every vertex comes from an actual strip distribution.
        for v in &verts {
            assert_strip_realizable(2, (2, 2), &targets, &proj, v);
        }
        // Every stored probe is strictly maximized at its own vertex.
        for (i, v) in verts.iter().enumerate() {
            for (j, w) in verts.iter().enumerate() {
                if i != j {
                    assert!(dot(&proj.probes[i], v) > dot(&proj.probes[i], w));
                }
            }
        }
        // Quotient under relabelling and lattice symmetries: six classes
        // with orbit sizes 1, 2, 2, 2, 2, 4.
        let group = marginal_symmetry_group(2, &targets).unwrap();
        let classes = quotient_classes(&proj.polytope, &group).unwrap();
        assert_eq!(classes.len(), 6);
        let mut sizes: Vec<usize> = classes.iter().map(|c| c.members.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2, 2, 2, 2, 4]);
    }

    #[test]
    fn seeded_projection_is_reproducible() {
        let targets = [Region::pair_h()];
        let a = project_lti_seeded(2, (2, 1), &targets, 7, DEFAULT_BUDGET).unwrap();
        let b = project_lti_seeded(2, (2, 1), &targets, 7, DEFAULT_BUDGET).unwrap();
        assert_eq!(a.polytope, b.polytope);
        assert_eq!(a.probes, b.probes);
    }
}
